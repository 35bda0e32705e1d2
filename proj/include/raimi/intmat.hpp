#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "precise_real.hpp"

namespace raimi {

using Mat = std::vector<std::vector<BigInt>>;  // row-major, rectangular

inline Mat identity_mat(size_t n) {
  Mat I(n, std::vector<BigInt>(n, 0));
  for (size_t i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

inline Mat mat_mul(const Mat& A, const Mat& B) {
  size_t m = A.size(), k = B.size(), n = B.empty() ? 0 : B[0].size();
  Mat C(m, std::vector<BigInt>(n, 0));
  for (size_t i = 0; i < m; ++i)
    for (size_t l = 0; l < k; ++l) {
      if (A[i][l] == 0) continue;
      for (size_t j = 0; j < n; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  return C;
}

// Exact determinant (Bareiss), for the small matrices used here.
inline BigInt det(Mat A) {
  size_t n = A.size();
  if (n == 0) return 1;
  BigInt sign = 1, prev = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (A[k][k] == 0) {
      size_t swap_row = k + 1;
      while (swap_row < n && A[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      std::swap(A[k], A[swap_row]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i)
      for (size_t j = k + 1; j < n; ++j)
        A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev;
    prev = A[k][k];
  }
  return sign * A[n - 1][n - 1];
}

// Row Hermite normal form: H = U*A with U unimodular; pivots positive,
// entries above each pivot reduced into [0, pivot), zero rows at the bottom.
struct HnfResult {
  Mat H;
  Mat U;
  size_t rank = 0;
};

inline HnfResult row_hnf(Mat A) {
  size_t m = A.size(), n = m ? A[0].size() : 0;
  Mat U = identity_mat(m);
  size_t r = 0;
  auto subtract_row = [&](size_t dst, size_t src, const BigInt& q) {
    if (q == 0) return;
    for (size_t j = 0; j < n; ++j) A[dst][j] -= q * A[src][j];
    for (size_t j = 0; j < m; ++j) U[dst][j] -= q * U[src][j];
  };
  for (size_t c = 0; c < n && r < m; ++c) {
    // gcd elimination below row r
    while (true) {
      size_t best = m;
      for (size_t i = r; i < m; ++i)
        if (A[i][c] != 0 &&
            (best == m || boost::multiprecision::abs(A[i][c]) <
                              boost::multiprecision::abs(A[best][c])))
          best = i;
      if (best == m) break;  // column clear below r
      if (best != r) {
        std::swap(A[r], A[best]);
        std::swap(U[r], U[best]);
      }
      bool clean = true;
      for (size_t i = r + 1; i < m; ++i)
        if (A[i][c] != 0) {
          subtract_row(i, r, floor_div(A[i][c], A[r][c]));
          if (A[i][c] != 0) clean = false;
        }
      if (clean) break;
    }
    if (A[r][c] == 0) continue;
    if (A[r][c] < 0) {
      for (auto& v : A[r]) v = -v;
      for (auto& v : U[r]) v = -v;
    }
    for (size_t i = 0; i < r; ++i) subtract_row(i, r, floor_div(A[i][c], A[r][c]));
    ++r;
  }
  return {std::move(A), std::move(U), r};
}

// HNF-canonical basis of the left kernel {m : m*A = 0}.
inline Mat left_kernel_basis(const Mat& A) {
  HnfResult h = row_hnf(A);
  Mat K(h.U.begin() + static_cast<long>(h.rank), h.U.end());
  if (K.empty()) return K;
  HnfResult canon = row_hnf(std::move(K));
  canon.H.resize(canon.rank);
  return canon.H;
}

// Smith normal form with transforms: L*A*R = diag(d), d_i > 0, d_i | d_{i+1},
// and W = R^{-1} maintained alongside.
struct SnfResult {
  std::vector<BigInt> d;
  Mat L, R, W;
  size_t rows = 0, cols = 0;
};

inline SnfResult smith_normal_form(Mat B) {
  size_t m = B.size(), n = m ? B[0].size() : 0;
  Mat L = identity_mat(m), R = identity_mat(n), W = identity_mat(n);

  auto row_sub = [&](size_t dst, size_t src, const BigInt& q) {
    if (q == 0) return;
    for (size_t j = 0; j < n; ++j) B[dst][j] -= q * B[src][j];
    for (size_t j = 0; j < m; ++j) L[dst][j] -= q * L[src][j];
  };
  auto col_sub = [&](size_t dst, size_t src, const BigInt& q) {
    if (q == 0) return;
    for (size_t i = 0; i < m; ++i) B[i][dst] -= q * B[i][src];
    for (size_t i = 0; i < n; ++i) R[i][dst] -= q * R[i][src];
    for (size_t j = 0; j < n; ++j) W[src][j] += q * W[dst][j];
  };
  auto col_swap = [&](size_t a, size_t b) {
    if (a == b) return;
    for (size_t i = 0; i < m; ++i) std::swap(B[i][a], B[i][b]);
    for (size_t i = 0; i < n; ++i) std::swap(R[i][a], R[i][b]);
    std::swap(W[a], W[b]);
  };
  auto row_swap = [&](size_t a, size_t b) {
    if (a == b) return;
    std::swap(B[a], B[b]);
    std::swap(L[a], L[b]);
  };

  size_t t = 0;
  while (t < std::min(m, n)) {
    // minimal nonzero entry of the trailing block to (t, t)
    size_t pi = m, pj = n;
    for (size_t i = t; i < m; ++i)
      for (size_t j = t; j < n; ++j)
        if (B[i][j] != 0 &&
            (pi == m || boost::multiprecision::abs(B[i][j]) <
                            boost::multiprecision::abs(B[pi][pj])))
          pi = i, pj = j;
    if (pi == m) break;
    row_swap(t, pi);
    col_swap(t, pj);

    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (size_t i = t + 1; i < m; ++i)
        if (B[i][t] != 0) {
          row_sub(i, t, floor_div(B[i][t], B[t][t]));
          if (B[i][t] != 0) {
            row_swap(t, i);
            dirty = true;
          }
        }
      for (size_t j = t + 1; j < n; ++j)
        if (B[t][j] != 0) {
          col_sub(j, t, floor_div(B[t][j], B[t][t]));
          if (B[t][j] != 0) {
            col_swap(t, j);
            dirty = true;
          }
        }
    }
    if (B[t][t] < 0) {
      for (size_t i = 0; i < m; ++i) B[i][t] = -B[i][t];
      for (size_t i = 0; i < n; ++i) R[i][t] = -R[i][t];
      for (size_t j = 0; j < n; ++j) W[t][j] = -W[t][j];
    }

    // divisibility: fold any non-multiple into position t and redo
    bool redo = false;
    for (size_t i = t + 1; i < m && !redo; ++i)
      for (size_t j = t + 1; j < n && !redo; ++j)
        if (B[i][j] % B[t][t] != 0) {
          row_sub(t, i, BigInt(-1));  // add row i to row t
          redo = true;
        }
    if (!redo) ++t;
  }

  SnfResult out;
  out.rows = m;
  out.cols = n;
  out.L = std::move(L);
  out.R = std::move(R);
  out.W = std::move(W);
  for (size_t i = 0; i < t; ++i) out.d.push_back(B[i][i]);
  return out;
}

// Is v in the row lattice of the (already HNF) basis?
inline bool lattice_contains(const Mat& hnf_basis, std::vector<BigInt> v) {
  size_t n = v.size();
  for (const auto& row : hnf_basis) {
    size_t p = 0;
    while (p < n && row[p] == 0) ++p;
    if (p == n) continue;
    if (v[p] % row[p] != 0) {
      // leading coefficient not reachable; keep reducing later pivots anyway
      return false;
    }
    BigInt q = v[p] / row[p];
    for (size_t j = 0; j < n; ++j) v[j] -= q * row[j];
  }
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

// Equal row lattices <=> identical canonical HNFs.
inline bool same_lattice(const Mat& a, const Mat& b) {
  HnfResult ha = row_hnf(a), hb = row_hnf(b);
  ha.H.resize(ha.rank);
  hb.H.resize(hb.rank);
  return ha.H == hb.H;
}

}  // namespace raimi

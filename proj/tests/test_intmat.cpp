#include <catch2/catch_amalgamated.hpp>

#include "raimi/intmat.hpp"
#include "raimi/rng.hpp"

using namespace raimi;

namespace {

Mat from_rows(std::initializer_list<std::initializer_list<long>> rows) {
  Mat out;
  for (auto& r : rows) {
    std::vector<BigInt> row;
    for (long v : r) row.emplace_back(v);
    out.push_back(std::move(row));
  }
  return out;
}

bool is_zero(const Mat& A) {
  for (auto& r : A)
    for (auto& v : r)
      if (v != 0) return false;
  return true;
}

Mat random_mat(SplitMix& rng, size_t m, size_t n, long span) {
  Mat A(m, std::vector<BigInt>(n));
  for (auto& row : A)
    for (auto& v : row)
      v = static_cast<long>(rng.next_below(2 * span + 1)) - span;
  return A;
}

}  // namespace

TEST_CASE("row HNF reconstructs and is canonical") {
  SplitMix rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    size_t m = 1 + rng.next_below(4), n = 1 + rng.next_below(5);
    Mat A = random_mat(rng, m, n, 9);
    HnfResult h = row_hnf(A);

    REQUIRE(mat_mul(h.U, A) == h.H);
    BigInt du = det(h.U);
    REQUIRE((du == 1 || du == -1));

    // echelon shape: strictly increasing pivot columns, trailing zero rows
    size_t prev_pivot = 0;
    bool seen_first = false;
    for (size_t i = 0; i < h.rank; ++i) {
      size_t p = 0;
      while (p < n && h.H[i][p] == 0) ++p;
      REQUIRE(p < n);
      if (seen_first) REQUIRE(p > prev_pivot);
      prev_pivot = p;
      seen_first = true;
      REQUIRE(h.H[i][p] > 0);
      for (size_t k = 0; k < i; ++k) {
        REQUIRE(h.H[k][p] >= 0);
        REQUIRE(h.H[k][p] < h.H[i][p]);
      }
    }
    for (size_t i = h.rank; i < m; ++i)
      for (size_t j = 0; j < n; ++j) REQUIRE(h.H[i][j] == 0);
  }
}

TEST_CASE("left kernel of coefficient matrices") {
  // rows are coefficient vectors of x and x^2: independent, trivial kernel
  REQUIRE(left_kernel_basis(from_rows({{1, 0}, {0, 1}})).empty());

  // x, x^2, x + x^2: single relation (1, 1, -1)
  Mat k1 = left_kernel_basis(from_rows({{1, 0}, {0, 1}, {1, 1}}));
  REQUIRE(k1 == from_rows({{1, 1, -1}}));

  // 2x, x: relation (1, -2)
  Mat k2 = left_kernel_basis(from_rows({{2}, {1}}));
  REQUIRE(k2 == from_rows({{1, -2}}));

  // sign-canonical: swapping input order flips the raw relation, HNF fixes it
  Mat k3 = left_kernel_basis(from_rows({{1}, {2}}));
  REQUIRE(k3 == from_rows({{2, -1}}));
}

TEST_CASE("kernel rows annihilate and span") {
  SplitMix rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    size_t m = 1 + rng.next_below(4), n = 1 + rng.next_below(4);
    Mat A = random_mat(rng, m, n, 6);
    Mat K = left_kernel_basis(A);
    if (!K.empty()) REQUIRE(is_zero(mat_mul(K, A)));
    REQUIRE(K.size() == m - row_hnf(A).rank);

    // random integer combinations of kernel rows stay in the lattice
    if (!K.empty()) {
      std::vector<BigInt> v(K[0].size(), 0);
      for (auto& row : K) {
        long c = static_cast<long>(rng.next_below(7)) - 3;
        for (size_t j = 0; j < v.size(); ++j) v[j] += c * row[j];
      }
      REQUIRE(lattice_contains(K, v));
    }
  }
}

TEST_CASE("Smith normal form transforms and divisibility") {
  SECTION("frozen small cases") {
    SnfResult s1 = smith_normal_form(from_rows({{1, 1, -1}}));
    REQUIRE(s1.d == std::vector<BigInt>{1});

    SnfResult s2 = smith_normal_form(from_rows({{2, 0}}));
    REQUIRE(s2.d == std::vector<BigInt>{2});

    SnfResult s3 = smith_normal_form(from_rows({{2, 0}, {0, 3}}));
    REQUIRE(s3.d == (std::vector<BigInt>{1, 6}));
  }

  SECTION("random property checks") {
    SplitMix rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
      size_t m = 1 + rng.next_below(4), n = 1 + rng.next_below(4);
      Mat A = random_mat(rng, m, n, 8);
      SnfResult s = smith_normal_form(A);

      Mat D = mat_mul(mat_mul(s.L, A), s.R);
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
          BigInt want = (i == j && i < s.d.size()) ? s.d[i] : BigInt(0);
          REQUIRE(D[i][j] == want);
        }

      for (size_t i = 0; i + 1 < s.d.size(); ++i) {
        REQUIRE(s.d[i] > 0);
        REQUIRE(s.d[i + 1] % s.d[i] == 0);
      }

      REQUIRE(mat_mul(s.R, s.W) == identity_mat(n));
      REQUIRE(mat_mul(s.W, s.R) == identity_mat(n));

      BigInt dl = det(s.L), dr = det(s.R);
      REQUIRE((dl == 1 || dl == -1));
      REQUIRE((dr == 1 || dr == -1));
    }
  }
}

TEST_CASE("lattice membership and equality") {
  Mat basis = row_hnf(from_rows({{2, 0, 1}, {0, 3, 1}})).H;
  basis.resize(2);
  REQUIRE(lattice_contains(basis, {2, 0, 1}));
  REQUIRE(lattice_contains(basis, {2, 3, 2}));
  REQUIRE(lattice_contains(basis, {0, 0, 0}));
  REQUIRE_FALSE(lattice_contains(basis, {1, 0, 0}));
  REQUIRE_FALSE(lattice_contains(basis, {2, 0, 0}));

  REQUIRE(same_lattice(from_rows({{1, 1, -1}}), from_rows({{-1, -1, 1}})));
  REQUIRE(same_lattice(from_rows({{2, 0}, {0, 3}}), from_rows({{2, 3}, {2, 0}})));
  REQUIRE_FALSE(same_lattice(from_rows({{2, 0}}), from_rows({{1, 0}})));

  SplitMix rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    size_t m = 1 + rng.next_below(3), n = 1 + rng.next_below(4);
    Mat A = random_mat(rng, m, n, 5);
    // unimodular row mix of A spans the same lattice
    Mat B = A;
    if (m >= 2) {
      long c = static_cast<long>(rng.next_below(5)) - 2;
      for (size_t j = 0; j < n; ++j) B[0][j] += c * B[1][j];
      std::swap(B[0], B[m - 1]);
    }
    REQUIRE(same_lattice(A, B));
  }
}

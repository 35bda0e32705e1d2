#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coloring.hpp"
#include "errors.hpp"
#include "precise_real.hpp"

namespace raimi {

namespace detail {

inline bool is_odd_prime(uint64_t q) {
  if (q < 3 || q % 2 == 0) return false;
  for (uint64_t d = 3; d * d <= q; d += 2)
    if (q % d == 0) return false;
  return true;
}

inline uint32_t fq_inv(uint32_t q, uint32_t a) {
  // extended Euclid; a != 0 mod q
  int64_t t = 0, nt = 1, r = q, nr = a % q;
  while (nr != 0) {
    int64_t quo = r / nr;
    std::swap(t -= quo * nt, nt);
    std::swap(r -= quo * nr, nr);
  }
  if (r != 1) throw PreconditionViolated("element is not invertible");
  return static_cast<uint32_t>(t < 0 ? t + q : t);
}

}  // namespace detail

// [[x, y], [z, w]] over F_q with xw - yz = 1
struct SL2Mat {
  uint32_t x = 0, y = 0, z = 0, w = 0;
  bool operator==(const SL2Mat&) const = default;
};

inline uint64_t sl2_size(uint64_t q) { return q * q * q - q; }

inline SL2Mat sl2_mul(uint32_t q, const SL2Mat& a, const SL2Mat& b) {
  auto mul = [q](uint32_t u, uint32_t v) { return (uint64_t)u * v % q; };
  SL2Mat c;
  c.x = (mul(a.x, b.x) + mul(a.y, b.z)) % q;
  c.y = (mul(a.x, b.y) + mul(a.y, b.w)) % q;
  c.z = (mul(a.z, b.x) + mul(a.w, b.z)) % q;
  c.w = (mul(a.z, b.y) + mul(a.w, b.w)) % q;
  return c;
}

inline SL2Mat sl2_transpose(const SL2Mat& a) { return SL2Mat{a.x, a.z, a.y, a.w}; }

// Canonical bijection {0..q^3-q-1} <-> SL2(F_q): for x != 0 the pair (y, z)
// is free and w = (1 + yz)/x; the x = 0 block has y != 0, z = -1/y, w free.
inline SL2Mat index_to_mat(uint32_t q, uint64_t idx) {
  SL2Mat m;
  uint64_t q2 = (uint64_t)q * q;
  if (idx < (uint64_t)(q - 1) * q2) {
    m.x = static_cast<uint32_t>(idx / q2) + 1;
    m.y = static_cast<uint32_t>(idx % q2 / q);
    m.z = static_cast<uint32_t>(idx % q);
    uint64_t num = (1 + (uint64_t)m.y * m.z) % q;
    m.w = static_cast<uint32_t>(num * detail::fq_inv(q, m.x) % q);
  } else {
    uint64_t rest = idx - (uint64_t)(q - 1) * q2;
    m.x = 0;
    m.y = static_cast<uint32_t>(rest / q) + 1;
    m.w = static_cast<uint32_t>(rest % q);
    m.z = static_cast<uint32_t>((uint64_t)(q - detail::fq_inv(q, m.y)) % q);
  }
  return m;
}

inline uint64_t mat_to_index(uint32_t q, const SL2Mat& m) {
  uint64_t q2 = (uint64_t)q * q;
  if (m.x != 0) return (uint64_t)(m.x - 1) * q2 + (uint64_t)m.y * q + m.z;
  return (q - 1) * q2 + (uint64_t)(m.y - 1) * q + m.w;
}

inline std::vector<SL2Mat> enumerate_sl2(uint32_t q) {
  if (!detail::is_odd_prime(q))
    throw UnsupportedField("group enumeration needs an odd prime q");
  std::vector<SL2Mat> out;
  out.reserve(sl2_size(q));
  for (uint64_t idx = 0; idx < sl2_size(q); ++idx) out.push_back(index_to_mat(q, idx));
  return out;
}

// Pieces E_i = {matrices with x in I_i}, where I_1..I_{r-1} are consecutive
// runs of floor(q/r) residues and I_r takes the remainder.
struct SL2Partition {
  uint32_t q = 0, r = 0;
  uint32_t run = 0;  // floor(q/r)

  SL2Partition(uint32_t q_, uint32_t r_) : q(q_), r(r_) {
    if (r_ == 0 || r_ > q_) throw PreconditionViolated("need 1 <= r <= q");
    run = q_ / r_;
  }

  uint32_t piece_of_x(uint32_t x) const {
    return std::min(x / run, r - 1) + 1;  // 1-based
  }
  uint32_t piece_of(const SL2Mat& m) const { return piece_of_x(m.x); }

  std::vector<uint64_t> piece_sizes() const {
    std::vector<uint64_t> sizes(r, 0);
    for (uint32_t x = 0; x < q; ++x) {
      uint64_t fiber = x == 0 ? (uint64_t)(q - 1) * q : (uint64_t)q * q;
      sizes[piece_of_x(x) - 1] += fiber;
    }
    return sizes;
  }
};

// Exact sum over nonzero v in F_q^2 of sum_lambda |U ∩ {p : p·v = lambda}|^2.
// Always equals (q-1)|U|(|U|+q): the diagonal contributes |U|(q^2-1) and
// each ordered distinct pair lies on q-1 common-level directions.
inline uint64_t second_moment(uint32_t q, std::vector<std::pair<uint32_t, uint32_t>> U) {
  std::sort(U.begin(), U.end());
  U.erase(std::unique(U.begin(), U.end()), U.end());
  uint64_t total = 0;
  std::vector<uint64_t> bucket(q);
  for (uint32_t v1 = 0; v1 < q; ++v1)
    for (uint32_t v2 = 0; v2 < q; ++v2) {
      if (v1 == 0 && v2 == 0) continue;
      std::fill(bucket.begin(), bucket.end(), 0);
      for (const auto& [p1, p2] : U)
        ++bucket[((uint64_t)p1 * v1 + (uint64_t)p2 * v2) % q];
      for (uint64_t b : bucket) total += b * b;
    }
  return total;
}

struct DirectionCertificate {
  uint32_t v1 = 0, v2 = 0;     // chosen direction, v2 != 0
  uint32_t good_lambdas = 0;   // lines with m(v, lambda) >= q/(2 t_eff)
  uint32_t t_eff = 0;
  Rational c;
  bool lemma_regime = false;   // q > t_eff / c, the averaging hypothesis
  uint32_t diag_v1 = 0, diag_v2 = 0;  // direction with the smallest sum m^2
  uint64_t diag_sum = 0;
};

// Scan directions v with v_2 != 0 in canonical order and return the first
// whose good-line count reaches (1-c) q. The second-moment-minimizing v is
// reported as a diagnostic regardless.
inline DirectionCertificate find_direction(uint32_t q,
                                           const std::vector<std::pair<uint32_t, uint32_t>>& U,
                                           uint32_t t_eff, const Rational& c) {
  if (t_eff == 0 || !(c > 0) || !(c < 1))
    throw PreconditionViolated("need t_eff >= 1 and c in (0, 1)");
  if ((uint64_t)U.size() * t_eff < (uint64_t)q * q)
    throw PreconditionViolated("projection too small for the direction scan");

  DirectionCertificate cert;
  cert.t_eff = t_eff;
  cert.c = c;
  cert.lemma_regime = Rational(q) * c > t_eff;  // q > 4t/c with t_eff = 4t

  bool found = false;
  uint64_t best_sum = UINT64_MAX;
  uint32_t best_good = 0;
  std::vector<uint64_t> bucket(q);
  for (uint32_t v1 = 0; v1 < q; ++v1)
    for (uint32_t v2 = 1; v2 < q; ++v2) {
      std::fill(bucket.begin(), bucket.end(), 0);
      for (const auto& [p1, p2] : U)
        ++bucket[((uint64_t)p1 * v1 + (uint64_t)p2 * v2) % q];
      uint32_t good = 0;
      uint64_t sum = 0;
      for (uint64_t b : bucket) {
        if (b * 2 * t_eff >= q) ++good;
        sum += b * b;
      }
      if (sum < best_sum) {
        best_sum = sum;
        cert.diag_v1 = v1;
        cert.diag_v2 = v2;
      }
      best_good = std::max(best_good, good);
      if (!found && Rational(good) >= (1 - c) * q) {
        found = true;
        cert.v1 = v1;
        cert.v2 = v2;
        cert.good_lambdas = good;
      }
    }
  cert.diag_sum = best_sum;
  if (!found)
    throw NoDirectionFound("no direction with v2 != 0 reached (1-c) q good lines; best " +
                           std::to_string(best_good) + " of " + std::to_string(q));
  return cert;
}

// h = [[v1, -1/v2], [v2, 0]]; det = (1/v2) v2 = 1.
inline SL2Mat shift_matrix(uint32_t q, uint32_t v1, uint32_t v2) {
  if (v2 % q == 0) throw ZeroSecondCoordinate("shift construction needs v2 != 0");
  SL2Mat h{v1 % q, (q - detail::fq_inv(q, v2 % q)) % q, v2 % q, 0};
  uint64_t det = ((uint64_t)h.x * h.w % q + (uint64_t)q * q - (uint64_t)h.y * h.z % q) % q;
  if (det != 1) throw InternalInvariantBroken("shift matrix determinant is not 1");
  return h;
}

struct SL2ShiftCertificate {
  uint32_t q = 0, r = 0, t = 0;
  uint32_t m = 0;
  bool transposed = false;  // pruning fell back to the column projection
  DirectionCertificate direction;
  SL2Mat h;
  std::vector<uint64_t> counts;  // per piece, of F_m h (or h^T F_m when transposed)
  uint64_t min_count = 0;
  Rational alpha;            // 1 / (64 r t^2); pass gate is alpha q^3
  Rational strong_threshold; // q^3 / (4 r t^2), the mid-proof target, reported only
  bool pass = false;
};

// Largest class, row projection pruned at q/(4t) completions (column
// projection as fallback), direction search with t_eff = 4t and c = 1/(2r),
// then exact per-piece counts of the shifted class.
inline SL2ShiftCertificate find_shift_sl2(const Coloring& coloring, uint32_t r, uint32_t t,
                                          bool allow_small_q = false) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::Sl2)
    throw PreconditionViolated("coloring carrier must be SL2(F_q)");
  uint32_t q = static_cast<uint32_t>(car.n);
  if (r == 0 || t == 0) throw PreconditionViolated("need r >= 1 and t >= 1");
  if (coloring.t() != t)
    throw PreconditionViolated("coloring class count must match t");
  bool admissible = detail::is_odd_prime(q) && (allow_small_q || q > 8ull * r * t);
  if (!admissible)
    throw PreconditionViolated("q must be an odd prime > 8rt");

  SL2ShiftCertificate cert;
  cert.q = q;
  cert.r = r;
  cert.t = t;
  cert.m = largest_class(coloring.class_sizes());
  cert.alpha = Rational(1, BigInt(64) * r * t * t);
  cert.strong_threshold = Rational(BigInt(q) * q * q, BigInt(4) * r * t * t);

  uint64_t size = sl2_size(q);
  std::vector<uint32_t> row_cnt((uint64_t)q * q, 0), col_cnt((uint64_t)q * q, 0);
  for (uint64_t idx = 0; idx < size; ++idx) {
    if (coloring.color(idx) != cert.m) continue;
    SL2Mat mat = index_to_mat(q, idx);
    ++row_cnt[(uint64_t)mat.x * q + mat.y];
    ++col_cnt[(uint64_t)mat.x * q + mat.z];
  }

  auto pruned = [&](const std::vector<uint32_t>& cnt) {
    std::vector<std::pair<uint32_t, uint32_t>> pts;
    for (uint32_t a = 0; a < q; ++a)
      for (uint32_t b = 0; b < q; ++b)
        if ((uint64_t)cnt[(uint64_t)a * q + b] * 4 * t >= q) pts.emplace_back(a, b);
    return pts;
  };

  std::vector<std::pair<uint32_t, uint32_t>> U = pruned(row_cnt);
  if ((uint64_t)U.size() * 4 * t >= (uint64_t)q * q) {
    cert.transposed = false;
  } else {
    U = pruned(col_cnt);
    if ((uint64_t)U.size() * 4 * t < (uint64_t)q * q)
      throw PruningAssumptionFailed(
          "neither projection kept q^2/(4t) pairs after pruning");
    cert.transposed = true;
  }

  cert.direction = find_direction(q, U, 4 * t, Rational(1, 2 * r));
  cert.h = shift_matrix(q, cert.direction.v1, cert.direction.v2);

  SL2Partition part(q, r);
  cert.counts.assign(r, 0);
  for (uint64_t idx = 0; idx < size; ++idx) {
    if (coloring.color(idx) != cert.m) continue;
    SL2Mat mat = index_to_mat(q, idx);
    // x entry of M h (or of M^T h): the dot product of the projected pair with v
    uint64_t lead = cert.transposed ? (uint64_t)mat.x * cert.h.x + (uint64_t)mat.z * cert.h.z
                                    : (uint64_t)mat.x * cert.h.x + (uint64_t)mat.y * cert.h.z;
    ++cert.counts[part.piece_of_x(static_cast<uint32_t>(lead % q)) - 1];
  }

  cert.min_count = *std::min_element(cert.counts.begin(), cert.counts.end());
  BigInt q3 = BigInt(q) * q * q;
  bool pass = true;
  for (uint64_t cnt : cert.counts)
    if (BigInt(cnt) * 64 * r * t * t < q3) pass = false;
  cert.pass = pass;
  return cert;
}

}  // namespace raimi

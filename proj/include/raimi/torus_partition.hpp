#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "coloring.hpp"
#include "errors.hpp"
#include "fs_sequence.hpp"
#include "precise_real.hpp"
#include "rng.hpp"

namespace raimi {

// Partition data for N^k: bands S_j = (1-2^-j, 1-2^-(j+1)], each split into
// r tiles, with the orbit map phi(a) = {sum alpha_m a_m}.
struct TorusPartitionSpec {
  uint32_t r = 2;
  uint32_t k = 1;
  std::vector<RealExpr> alphas;
  RealExpr beta;  // certified sum of the alphas
  PrecisionConfig cfg = PrecisionConfig::defaults();

  // alpha_i = log2 of the i-th odd prime; 1, alpha_1, ..., alpha_k stay
  // rationally independent by unique factorization
  static TorusPartitionSpec log_primes(uint32_t r, uint32_t k,
                                       PrecisionConfig cfg = PrecisionConfig::defaults()) {
    if (r == 0 || k == 0) throw PreconditionViolated("need r >= 1 and k >= 1");
    TorusPartitionSpec spec;
    spec.r = r;
    spec.k = k;
    spec.cfg = cfg;
    std::vector<uint64_t> primes;
    for (uint64_t p = 3; primes.size() < k; p += 2) {
      bool comp = false;
      for (uint64_t d = 3; d * d <= p && !comp; d += 2) comp = p % d == 0;
      if (!comp) primes.push_back(p);
    }
    spec.beta = RealExpr::rational(Rational(0));
    for (uint64_t p : primes) {
      spec.alphas.push_back(RealExpr::log2_int(p));
      spec.beta = spec.beta + spec.alphas.back();
    }
    return spec;
  }
};

struct BandTile {
  uint64_t j = 0;
  uint32_t i = 0;
  bool operator==(const BandTile&) const = default;
};

inline Rational band_lo(uint64_t j) { return 1 - Rational(1, pow2(j)); }
inline Rational band_width(uint64_t j) { return Rational(1, pow2(j + 1)); }
inline Rational tile_width(uint64_t j, uint32_t r) { return band_width(j) / r; }

// Exact classification of u in (0,1): band j with u in S_j, then the
// left-open right-closed tile index i = ceil((u - a_j) / tau_j).
inline BandTile tile_of(uint32_t r, const Rational& u) {
  if (!(u > 0 && u < 1)) throw PreconditionViolated("u must lie in (0,1)");
  Rational v = 1 - u;  // u in S_j  <=>  v in [2^-(j+1), 2^-j)
  uint64_t j = 0;
  while (v < band_width(j)) ++j;
  Rational q = (u - band_lo(j)) * r / band_width(j);
  BigInt i = -floor_div(-boost::multiprecision::numerator(q),
                        boost::multiprecision::denominator(q));
  return BandTile{j, static_cast<uint32_t>(i)};
}

// Fast path: u as a 64-bit fixed-point fraction known to within `slack`
// units of 2^-64. Returns nullopt whenever the enclosure comes within
// `slack` of any band or tile boundary; those points take the exact path.
inline std::optional<BandTile> classify_u64(uint64_t u, uint32_t r, uint64_t slack) {
  uint64_t v = 0 - u;  // 1 - u, exact in the wrap-around sense
  if (u < slack || v < slack || u == 0) return std::nullopt;
  int bw = std::bit_width(v);
  uint64_t v_lo = uint64_t(1) << (bw - 1);
  if (v - v_lo < slack) return std::nullopt;
  if (bw < 64 && (v_lo << 1) - v < slack) return std::nullopt;
  uint64_t j = 64 - static_cast<uint64_t>(bw);
  uint64_t lo = (j == 0) ? 0 : (0 - (uint64_t(1) << (64 - j)));
  uint64_t off = u - lo;                         // in (0, 2^(63-j)]
  unsigned __int128 den = (unsigned __int128)1 << (63 - j);
  unsigned __int128 X = (unsigned __int128)off * r;
  unsigned __int128 rem = X % den;
  unsigned __int128 guard = (unsigned __int128)slack * r;
  if (rem < guard || den - rem < guard) return std::nullopt;
  uint64_t i = static_cast<uint64_t>((X + den - 1) / den);
  return BandTile{j, static_cast<uint32_t>(i)};
}

inline RealExpr orbit_expr(const TorusPartitionSpec& spec,
                           const std::vector<uint64_t>& a) {
  if (a.size() != spec.k) throw PreconditionViolated("point dimension mismatch");
  RealExpr e = RealExpr::rational(Rational(0));
  for (uint32_t m = 0; m < spec.k; ++m) {
    if (a[m] == 0) throw PreconditionViolated("lattice points start at 1");
    e = e + spec.alphas[m].scaled_by(BigInt(a[m]));
  }
  return e;
}

// phi(a) = {sum alpha_m a_m} as a certified enclosure
inline PreciseReal phi(const TorusPartitionSpec& spec, const std::vector<uint64_t>& a) {
  return orbit_expr(spec, a).eval(spec.cfg.precision_bits).frac_part();
}

// Certified band/tile of the fractional part of x, escalating precision
// until the enclosure fits strictly inside one tile.
inline BandTile tile_of_certified(const TorusPartitionSpec& spec, const RealExpr& x) {
  for (uint32_t esc = 0; esc <= spec.cfg.max_escalations; ++esc) {
    int64_t bits = (spec.cfg.precision_bits << esc) + spec.cfg.guard_bits;
    PreciseReal u = x.eval(bits).frac_part();
    Rational lo = u.lower(), hi = u.upper();
    if (!(lo > 0 && hi < 1)) continue;
    BandTile a = tile_of(spec.r, lo), b = tile_of(spec.r, hi);
    if (a == b) return a;
  }
  throw PrecisionExhausted("tile classification did not stabilize");
}

inline uint32_t color_point(const TorusPartitionSpec& spec,
                            const std::vector<uint64_t>& a) {
  return tile_of_certified(spec, orbit_expr(spec, a)).i;
}

namespace detail {

// floor(alpha * 2^64) for one spec alpha, certified by enclosure agreement
inline uint64_t alpha_scaled64(const RealExpr& alpha, const PrecisionConfig& cfg) {
  for (uint32_t esc = 0; esc <= cfg.max_escalations; ++esc) {
    int64_t bits = std::max<int64_t>(128, cfg.precision_bits << esc);
    PreciseReal v = alpha.eval(bits);
    BigInt lo = floor_shift(v.scaled() - v.err_ulp(), bits - 64);
    BigInt hi = floor_shift(v.scaled() + v.err_ulp(), bits - 64);
    if (lo == hi) return static_cast<uint64_t>(lo & BigInt(~uint64_t(0)));
  }
  throw PrecisionExhausted("alpha fixed-point projection did not stabilize");
}

}  // namespace detail

struct DenseInterval {
  uint32_t m = 0;
  Rational lo, hi;
  uint64_t cells = 0;  // run length at grid resolution
};

// Grid surrogate of interval density: marks which delta_grid cells of (0,1)
// contain phi(a) for each color class over the whole box, then returns the
// class with the longest run of consecutive marked cells (non-wrapping).
// Marking uses exact mod-2^64 arithmetic: the computed cell can differ from
// the true one only when phi(a) is within k*M*2^-64 of a cell edge.
inline DenseInterval find_dense_interval(const Coloring& coloring,
                                         const TorusPartitionSpec& spec,
                                         const Rational& delta_grid = Rational(1, 64)) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::Box || car.box_k != spec.k)
    throw PreconditionViolated("coloring carrier must be the spec box");
  uint64_t M = car.n;
  const BigInt& p = boost::multiprecision::numerator(delta_grid);
  const BigInt& q = boost::multiprecision::denominator(delta_grid);
  if (p * p * M < q * q)
    throw PreconditionViolated("delta_grid below 1/sqrt(M); box too small");
  uint64_t G = static_cast<uint64_t>(-floor_div(-q, p));

  std::vector<uint64_t> A(spec.k);
  for (uint32_t m = 0; m < spec.k; ++m)
    A[m] = detail::alpha_scaled64(spec.alphas[m], spec.cfg);

  uint32_t t = coloring.t();
  std::vector<std::vector<char>> present(t + 1, std::vector<char>(G, 0));

  std::vector<uint64_t> a(spec.k, 1);
  uint64_t idx = 0;
  while (true) {
    uint64_t u_row = 0;
    for (uint32_t m = 1; m < spec.k; ++m) u_row += a[m] * A[m];
    uint64_t u = u_row;
    for (a[0] = 1; a[0] <= M; ++a[0], ++idx) {
      u += A[0];
      uint64_t cell = static_cast<uint64_t>(((unsigned __int128)u * G) >> 64);
      present[coloring.color(idx)][cell] = 1;
    }
    uint32_t m = 1;
    while (m < spec.k && a[m] == M) a[m++] = 1;
    if (m == spec.k) break;
    ++a[m];
  }

  uint32_t best_m = 0;
  uint64_t best_len = 0, best_start = 0;
  for (uint32_t m = 1; m <= t; ++m) {
    uint64_t run = 0;
    for (uint64_t c = 0; c < G; ++c) {
      run = present[m][c] ? run + 1 : 0;
      if (run > best_len) {
        best_len = run;
        best_start = c + 1 - run;
        best_m = m;
      }
    }
  }
  if (best_len < 3)
    throw NoDenseInterval("no class fills three consecutive grid cells");
  return DenseInterval{best_m, Rational(BigInt(best_start), BigInt(G)),
                       Rational(BigInt(best_start + best_len), BigInt(G)), best_len};
}

struct ShiftPlan {
  uint64_t j_star = 0;
  uint64_t x0 = 0;
  Rational eps;        // dyadic, denominator 2^64
  Rational eps0;       // required margin during the scan
  double sigma = 0;    // {x0 * beta}
  double margin_left = 0, margin_right = 0;
};

// Choose the band index j* with |S_j*| <= |J|/3, then the smallest shift
// count x0 whose rotation places S_j* inside J + {x0 beta} with margin
// > eps0 on both sides; eps is half the certified smaller margin, rounded
// down to 64 dyadic bits.
inline ShiftPlan plan_shift(const Rational& J_lo, const Rational& J_hi,
                            const TorusPartitionSpec& spec, uint64_t x0_max = 10000,
                            uint64_t j_max = 40) {
  Rational delta = J_hi - J_lo;
  if (!(delta > 0)) throw PreconditionViolated("empty interval");

  uint64_t j_star = 0;
  while (j_star <= j_max && band_width(j_star) * 3 > delta) ++j_star;
  if (j_star > j_max) throw SearchExhausted("no band narrow enough for the interval");

  Rational width = band_width(j_star);
  Rational eps0 = (delta / 3 - width) / 2;
  Rational room = delta - width;  // ml + mr
  Rational upper = room - eps0;

  for (uint64_t x0 = 1; x0 <= x0_max; ++x0) {
    RealExpr expr = RealExpr::rational(band_lo(j_star) - J_lo) -
                    spec.beta.scaled_by(BigInt(x0));
    for (uint32_t esc = 0; esc <= spec.cfg.max_escalations; ++esc) {
      int64_t bits = (spec.cfg.precision_bits << esc) + spec.cfg.guard_bits;
      PreciseReal u = expr.eval(bits).frac_part();
      Rational lo = u.lower(), hi = u.upper();
      if (hi <= eps0 || lo >= upper) break;  // certified failure for this x0
      if (lo > eps0 && hi < upper) {
        Rational right = room - hi;
        Rational m = std::min(lo, right);
        BigInt num = floor_div(boost::multiprecision::numerator(m) * pow2(63),
                               boost::multiprecision::denominator(m));
        if (num <= 0) break;  // margin too thin to freeze
        ShiftPlan plan;
        plan.j_star = j_star;
        plan.x0 = x0;
        plan.eps = Rational(num, pow2(64));
        plan.eps0 = eps0;
        PreciseReal sig = spec.beta.scaled_by(BigInt(x0)).eval(128).frac_part();
        plan.sigma = sig.to_double();
        plan.margin_left = u.to_double();
        plan.margin_right = room.convert_to<double>() - plan.margin_left;
        return plan;
      }
      // undecided: escalate
    }
  }
  throw SearchExhausted("no admissible base shift up to x0_max");
}

// Closed-interval arithmetic on the circle: does (s2, s2+l2] contain
// (s1, s1+l1] after reducing the anchor difference mod 1?
inline bool circle_interval_contains(const Rational& s2, const Rational& l2,
                                     const Rational& s1, const Rational& l1) {
  if (l1 <= 0) return true;
  if (l2 >= 1) return true;
  Rational d = s1 - s2;
  d -= Rational(floor_div(boost::multiprecision::numerator(d),
                          boost::multiprecision::denominator(d)));
  return d + l1 <= l2;
}

struct HdWitness {
  uint64_t h = 0;
  uint32_t piece = 0;
  std::vector<uint64_t> a;  // base point; a + h*1_k lands in the piece
};

struct HdParams {
  uint64_t M = 10000;
  uint32_t K = 3;
  Rational delta_grid = Rational(1, 64);
  uint32_t max_sampled = 8;
  uint64_t seed = 0;
  uint64_t x0_max = 10000;
};

struct HdCertificate {
  uint32_t m = 0;
  Rational J_lo, J_hi;
  uint64_t j_star = 0, x0 = 0;
  double sigma = 0;
  Rational eps;
  FsSequence fs;
  std::vector<uint64_t> sample_masks;  // empty when all subsets were used
  std::vector<uint64_t> sampled_h;     // ascending, deduplicated
  std::vector<std::vector<uint64_t>> counts;  // [shift][piece-1]
  std::vector<HdWitness> witnesses;
  bool pass = false;
  std::vector<std::pair<uint64_t, uint32_t>> failures;  // (h, piece)
};

namespace detail {

// Exact per-piece counts of {a in [1, M-h]^k : a in F, a + h*1_k in E_i}.
// F is given as a bitmap over row-major box indices; near-boundary points
// fall back to certified classification so every count is exact.
struct BoxCounter {
  const TorusPartitionSpec& spec;
  uint64_t M;
  std::vector<uint64_t> A;
  uint64_t slack;

  explicit BoxCounter(const TorusPartitionSpec& s, uint64_t M_) : spec(s), M(M_) {
    A.resize(spec.k);
    for (uint32_t m = 0; m < spec.k; ++m)
      A[m] = alpha_scaled64(spec.alphas[m], spec.cfg);
    uint64_t bias = 8 * spec.k * (M + 1);
    slack = std::max<uint64_t>(uint64_t(1) << 20, bias);
  }

  std::vector<uint64_t> count(const std::vector<uint64_t>& bitmap, uint64_t h,
                              std::vector<HdWitness>* witnesses) const {
    std::vector<uint64_t> counts(spec.r, 0);
    if (h >= M) return counts;
    uint64_t lim = M - h;
    std::vector<uint64_t> a(spec.k, 1);
    std::vector<std::pair<std::vector<uint64_t>, uint32_t>> first(spec.r);

    while (true) {
      uint64_t u_row = h * A[0];
      for (uint32_t m = 1; m < spec.k; ++m) u_row += (a[m] + h) * A[m];
      uint64_t row_idx = 0;
      for (uint32_t m = spec.k; m-- > 1;) row_idx = row_idx * M + (a[m] - 1);
      row_idx *= M;
      uint64_t u = u_row;
      for (a[0] = 1; a[0] <= lim; ++a[0]) {
        u += A[0];
        uint64_t idx = row_idx + a[0] - 1;
        if (!(bitmap[idx >> 6] >> (idx & 63) & 1)) continue;
        std::optional<BandTile> bt = classify_u64(u, spec.r, slack);
        uint32_t piece;
        if (bt) {
          piece = bt->i;
        } else {
          std::vector<uint64_t> y(spec.k);
          for (uint32_t m = 0; m < spec.k; ++m) y[m] = a[m] + h;
          piece = color_point(spec, y);
        }
        if (counts[piece - 1]++ == 0 && witnesses) first[piece - 1] = {a, piece};
      }
      uint32_t m = 1;
      while (m < spec.k && a[m] == lim) a[m++] = 1;
      if (m == spec.k) break;
      ++a[m];
    }

    if (witnesses)
      for (uint32_t i = 0; i < spec.r; ++i)
        if (counts[i] > 0) {
          // re-verify the witness through the certified path
          std::vector<uint64_t> y(spec.k);
          for (uint32_t m = 0; m < spec.k; ++m) y[m] = first[i].first[m] + h;
          if (color_point(spec, y) != i + 1)
            throw InternalInvariantBroken("witness failed certified recheck");
          witnesses->push_back(HdWitness{h, i + 1, first[i].first});
        }
    return counts;
  }
};

inline std::vector<uint64_t> class_bitmap(const Coloring& coloring, uint32_t m) {
  uint64_t n = coloring.size();
  std::vector<uint64_t> bm((n + 63) / 64, 0);
  for (uint64_t idx = 0; idx < n; ++idx)
    if (coloring.color(idx) == m) bm[idx >> 6] |= uint64_t(1) << (idx & 63);
  return bm;
}

}  // namespace detail

// End-to-end pipeline: dense interval, shift plan, FS sequence, then exact
// intersection counts for every sampled shift h = x0 + (subset sum of FS).
inline HdCertificate hd_certify(const Coloring& coloring, const TorusPartitionSpec& spec,
                                const HdParams& params) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::Box || car.box_k != spec.k || car.n != params.M)
    throw PreconditionViolated("coloring carrier must match the box parameters");

  HdCertificate cert;
  DenseInterval dense = find_dense_interval(coloring, spec, params.delta_grid);
  cert.m = dense.m;
  cert.J_lo = dense.lo;
  cert.J_hi = dense.hi;

  ShiftPlan plan = plan_shift(dense.lo, dense.hi, spec, params.x0_max);
  cert.j_star = plan.j_star;
  cert.x0 = plan.x0;
  cert.sigma = plan.sigma;
  cert.eps = plan.eps;

  cert.fs = build_fs(spec.beta, plan.eps, params.K, spec.cfg);

  uint64_t total_masks = (params.K >= 64) ? ~uint64_t(0) : (uint64_t(1) << params.K) - 1;
  std::vector<uint64_t> masks;
  if (total_masks <= params.max_sampled) {
    for (uint64_t m = 1; m <= total_masks; ++m) masks.push_back(m);
  } else {
    SplitMix rng(params.seed);
    std::set<uint64_t> seen;
    while (seen.size() < params.max_sampled) seen.insert(1 + rng.next_below(total_masks));
    masks.assign(seen.begin(), seen.end());
    cert.sample_masks = masks;
  }
  std::set<uint64_t> hs;
  for (uint64_t mask : masks) {
    uint64_t s = 0;
    for (uint32_t b = 0; b < params.K; ++b)
      if (mask >> b & 1) s += static_cast<uint64_t>(cert.fs.elements[b]);
    hs.insert(plan.x0 + s);
  }
  cert.sampled_h.assign(hs.begin(), hs.end());

  std::vector<uint64_t> bitmap = detail::class_bitmap(coloring, dense.m);
  detail::BoxCounter counter(spec, params.M);
  for (uint64_t h : cert.sampled_h) {
    cert.counts.push_back(counter.count(bitmap, h, &cert.witnesses));
    for (uint32_t i = 0; i < spec.r; ++i)
      if (cert.counts.back()[i] == 0) cert.failures.emplace_back(h, i + 1);
  }
  cert.pass = cert.failures.empty();
  return cert;
}

}  // namespace raimi

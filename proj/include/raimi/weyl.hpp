#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "coloring.hpp"
#include "errors.hpp"
#include "poly_lattice.hpp"
#include "precise_real.hpp"
#include "torus_partition.hpp"

namespace raimi {

// Orbit point v(n) = ({beta P_1(n)}, ..., {beta P_f(n)}).
struct OrbitPoint {
  uint64_t n = 0;
  std::vector<double> v;  // each coordinate in [0, 1)
};

namespace detail {

// {x} as a double in [0, 1) from an enclosure midpoint.
inline double frac_double(const PreciseReal& x) {
  double f = scaled_to_double(x.frac_fixed(), x.bits());
  if (f >= 1.0) f = std::nextafter(1.0, 0.0);
  return f < 0.0 ? 0.0 : f;
}

inline bool is_zero_poly(const IntPolynomial& p) {
  for (const auto& c : p.coeffs)
    if (c != 0) return false;
  return true;
}

}  // namespace detail

inline OrbitPoint orbit_point(const RealExpr& beta, const std::vector<IntPolynomial>& polys,
                              uint64_t n,
                              const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  OrbitPoint pt;
  pt.n = n;
  for (const auto& p : polys) {
    BigInt val = p.eval(BigInt(n));
    unsigned bits = cfg.precision_bits + bit_length(val) + cfg.guard_bits;
    pt.v.push_back(detail::frac_double(beta.eval(bits).mul_int(val)));
  }
  return pt;
}

// (1/N) sum_{n=1..N} e^{2 pi i beta Q(n)}. Phases come from certified
// fractional parts and are reduced to double only at the exponential;
// Q == 0 short-circuits to exactly 1.
inline std::complex<double> weyl_sum(const RealExpr& beta, const IntPolynomial& q,
                                     uint64_t n_max,
                                     const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  if (n_max < 1) throw PreconditionViolated("summation horizon must be positive");
  if (detail::is_zero_poly(q)) return {1.0, 0.0};

  std::complex<double> s{0.0, 0.0};
  if (beta.is_rational()) {
    Rational b = beta.rational_value();
    const BigInt& num = boost::multiprecision::numerator(b);
    const BigInt& den = boost::multiprecision::denominator(b);
    for (uint64_t n = 1; n <= n_max; ++n) {
      BigInt r = (q.eval(BigInt(n)) * num) % den;
      if (r < 0) r += den;
      double f = Rational(r, den).convert_to<double>();
      s += std::polar(1.0, 2.0 * M_PI * f);
    }
  } else {
    BigInt bound = 0, npow = 1;
    for (size_t i = 0; i < q.degree(); ++i) {
      npow *= n_max;
      bound += boost::multiprecision::abs(q.coeffs[i]) * npow;
    }
    PreciseReal b = beta.eval(cfg.precision_bits + bit_length(bound) + cfg.guard_bits);
    for (uint64_t n = 1; n <= n_max; ++n)
      s += std::polar(1.0, 2.0 * M_PI * detail::frac_double(b.mul_int(q.eval(BigInt(n)))));
  }
  return s / static_cast<double>(n_max);
}

struct EquidistEntry {
  std::vector<BigInt> m;
  bool in_lattice = false;  // m annihilates H; the character is trivial on it
  double abs_avg = 0.0;     // |S_N|, exactly 1 when in_lattice
};

// Weyl averages of the characters m over the orbit, classified against the
// relation lattice of H. For m in the lattice the combined polynomial is
// identically zero and the average is 1 at every horizon.
inline std::vector<EquidistEntry> equidist_on_H(
    const RealExpr& beta, const std::vector<IntPolynomial>& polys, const SubtorusH& H,
    const std::vector<std::vector<BigInt>>& trial_ms, uint64_t n_max,
    const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  std::vector<EquidistEntry> out;
  size_t dmax = 0;
  for (const auto& p : polys) dmax = std::max(dmax, p.degree());
  for (const auto& m : trial_ms) {
    if (m.size() != polys.size())
      throw PreconditionViolated("character dimension does not match the family");
    EquidistEntry e;
    e.m = m;
    e.in_lattice = lattice_contains(H.relations, m);
    IntPolynomial qm;
    qm.coeffs.assign(dmax, BigInt(0));
    for (size_t i = 0; i < polys.size(); ++i)
      for (size_t j = 0; j < polys[i].degree(); ++j)
        qm.coeffs[j] += m[i] * polys[i].coeffs[j];
    if (e.in_lattice) {
      if (!detail::is_zero_poly(qm))
        throw InternalInvariantBroken("lattice member with nonzero combination");
      e.abs_avg = 1.0;
    } else {
      e.abs_avg = std::abs(weyl_sum(beta, qm, n_max, cfg));
    }
    out.push_back(std::move(e));
  }
  return out;
}

struct PrefixDensity {
  uint64_t n = 0;
  uint64_t hits = 0;
  double density = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
};

struct XEpsReport {
  Rational eps;
  uint64_t n = 0;                 // scan horizon
  std::vector<uint64_t> hits;     // ascending; every entry certified
  uint64_t uncertain_count = 0;   // escalation exhausted; never counted as hits
  double empirical_density = 0.0;
  double predicted = 0.0;         // Haar measure of the eps-box on H
  bool predicted_exact = false;   // false: Monte-Carlo reference
  std::vector<PrefixDensity> prefixes;  // dyadic horizons, ascending
  double prefix_min_density = 0.0;
};

namespace detail {

// Scan state for one polynomial. When `fast` holds, u = P(h)*A mod 2^64
// differs from the true scaled fractional part by less than `slack`, so the
// three zone tests below are conclusive; everything else goes through the
// certified path.
struct PolyScanner {
  const IntPolynomial* poly = nullptr;
  BigInt bound;  // max |P(h)| over the scan
  bool fast = false;
  std::vector<uint64_t> c64;
  uint64_t slack = 0;
  uint64_t hit0_hi = 0, miss_lo = 0, miss_hi = 0, hit1_lo = 0;

  // 1 hit, 0 miss, -1 undecided
  int zone(uint64_t u) const {
    if (u <= hit0_hi) return 1;
    if (u >= miss_lo && u <= miss_hi) return 0;
    if (u >= hit1_lo) return 1;
    return -1;
  }

  uint64_t eval_mod64(uint64_t h) const {
    uint64_t acc = 0;
    for (size_t i = c64.size(); i-- > 0;) acc = acc * h + c64[i];
    return acc * h;
  }
};

// Lazily evaluated enclosures of beta, one per escalation level.
struct BetaLevels {
  const RealExpr& beta;
  const PrecisionConfig& cfg;
  unsigned extra;
  std::vector<std::optional<PreciseReal>> levels;

  const PreciseReal& at(unsigned esc) {
    if (levels.size() <= esc) levels.resize(esc + 1);
    if (!levels[esc]) levels[esc] = beta.eval((cfg.precision_bits << esc) + extra);
    return *levels[esc];
  }
};

inline Ternary certified_norm_hit(BetaLevels& ctx, const BigInt& val, const Rational& eps) {
  for (unsigned esc = 0; esc <= ctx.cfg.max_escalations; ++esc) {
    Ternary t = ctx.at(esc).mul_int(val).dist_to_int().less_than(eps);
    if (t != Ternary::Uncertain) return t;
  }
  return Ternary::Uncertain;
}

}  // namespace detail

// Scan h = 1..N for max_i ||{beta P_i(h)}|| < eps with exact integer P(h)
// and certified decisions: the wrapping mod-2^64 test decides points far
// from the eps boundary, the enclosure path decides the rest, and anything
// still undecided after escalation is reported as uncertain, never a hit.
inline XEpsReport find_x_eps(const RealExpr& beta, const std::vector<IntPolynomial>& polys,
                             const Rational& eps, uint64_t n_max,
                             const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  if (!(eps > 0 && eps < Rational(1, 2)))
    throw PreconditionViolated("eps must lie in (0, 1/2)");
  if (polys.empty()) throw PreconditionViolated("empty polynomial family");
  for (const auto& p : polys)
    if (p.degree() == 0 || detail::is_zero_poly(p))
      throw PreconditionViolated("zero polynomial in family");
  if (n_max < 1) throw PreconditionViolated("scan horizon must be positive");

  XEpsReport rep;
  rep.eps = eps;
  rep.n = n_max;

  SubtorusH H = subtorus_param(relation_lattice(polys));
  if (auto exact = haar_box_measure_exact(H, eps)) {
    rep.predicted = exact->convert_to<double>();
    rep.predicted_exact = true;
  } else {
    rep.predicted = haar_box_measure(H, eps, 200000, 1).estimate;
  }

  const bool rational_beta = beta.is_rational();
  uint64_t A = rational_beta ? 0 : detail::alpha_scaled64(beta, cfg);
  const BigInt two64 = pow2(64);
  uint64_t E = floor_div(boost::multiprecision::numerator(eps) << 64,
                         boost::multiprecision::denominator(eps))
                   .convert_to<uint64_t>();

  std::vector<detail::PolyScanner> scanners;
  unsigned max_pbits = 1;
  for (const auto& p : polys) {
    detail::PolyScanner s;
    s.poly = &p;
    BigInt b = 0, npow = 1;
    for (size_t i = 0; i < p.degree(); ++i) {
      npow *= n_max;
      b += boost::multiprecision::abs(p.coeffs[i]) * npow;
    }
    s.bound = b;
    max_pbits = std::max(max_pbits, bit_length(b));
    if (!rational_beta && b < (BigInt(1) << 48)) {
      s.slack = b.convert_to<uint64_t>() + 1;
      if (E > 2 * s.slack) {
        s.fast = true;
        s.c64.resize(p.degree());
        for (size_t i = 0; i < p.degree(); ++i) {
          BigInt r = p.coeffs[i] % two64;
          if (r < 0) r += two64;
          s.c64[i] = r.convert_to<uint64_t>();
        }
        s.hit0_hi = E - s.slack - 1;
        s.miss_lo = E + s.slack + 1;
        s.miss_hi = uint64_t(0) - E - s.slack - 1;
        s.hit1_lo = (uint64_t(0) - E) + s.slack + 1;
      }
    }
    scanners.push_back(std::move(s));
  }

  detail::BetaLevels levels{beta, cfg, max_pbits + cfg.guard_bits, {}};
  Rational beta_rat = rational_beta ? beta.rational_value() : Rational(0);

  for (uint64_t h = 1; h <= n_max; ++h) {
    bool miss = false, uncertain = false;
    for (const auto& s : scanners) {
      int z = -1;
      if (s.fast) z = s.zone(s.eval_mod64(h) * A);
      if (z == -1) {
        BigInt val = s.poly->eval(BigInt(h));
        if (rational_beta) {
          z = detail::rat_circle_norm(beta_rat * Rational(val)) < eps ? 1 : 0;
        } else {
          Ternary t = detail::certified_norm_hit(levels, val, eps);
          z = (t == Ternary::True) ? 1 : (t == Ternary::False ? 0 : -1);
        }
      }
      if (z == 0) {
        miss = true;
        break;
      }
      if (z == -1) uncertain = true;
    }
    if (miss) continue;
    if (uncertain) {
      ++rep.uncertain_count;
      continue;
    }
    rep.hits.push_back(h);
  }

  // independent recheck of a bounded sample of hits
  if (!rational_beta) {
    auto recheck = [&](uint64_t h) {
      for (const auto& p : polys)
        if (norm_less(beta, p.eval(BigInt(h)), eps, cfg) == Ternary::False)
          throw InternalInvariantBroken("reported hit failed certified recheck");
    };
    size_t head = std::min<size_t>(rep.hits.size(), 32);
    for (size_t i = 0; i < head; ++i) recheck(rep.hits[i]);
    if (rep.hits.size() > head) recheck(rep.hits.back());
  }

  rep.empirical_density = static_cast<double>(rep.hits.size()) / static_cast<double>(n_max);

  std::vector<uint64_t> horizons;
  for (uint64_t m = n_max; m >= 1000; m >>= 1) horizons.push_back(m);
  if (horizons.empty()) horizons.push_back(n_max);
  std::sort(horizons.begin(), horizons.end());
  rep.prefix_min_density = 1.0;
  for (uint64_t m : horizons) {
    PrefixDensity pd;
    pd.n = m;
    pd.hits = std::upper_bound(rep.hits.begin(), rep.hits.end(), m) - rep.hits.begin();
    pd.density = static_cast<double>(pd.hits) / static_cast<double>(m);
    std::tie(pd.ci_low, pd.ci_high) = detail::wilson95(pd.hits, m);
    rep.prefix_min_density = std::min(rep.prefix_min_density, pd.density);
    rep.prefixes.push_back(pd);
  }
  return rep;
}

namespace detail {

// smallest c with c^3 >= M^2
inline uint64_t ceil_pow23(uint64_t M) {
  uint64_t c = static_cast<uint64_t>(
      std::cbrt(static_cast<double>(M) * static_cast<double>(M)));
  while (c > 0 && (c - 1) * (c - 1) * (c - 1) >= M * M) --c;
  while (c * c * c < M * M) ++c;
  return c;
}

}  // namespace detail

struct PolyParams {
  uint64_t M = 10000;
  Rational delta_grid = Rational(1, 64);
  uint32_t max_selected = 4;
  uint64_t scan_n = 0;  // 0: scan up to M
  uint64_t x0_max = 10000;
};

struct PolyFailure {
  uint64_t h = 0;
  uint32_t poly = 0;   // 1-based index into the family
  uint32_t piece = 0;  // 1-based tile piece
};

struct PolyCertificate {
  uint32_t m = 0;
  Rational J_lo, J_hi;
  uint64_t j_star = 0, x0 = 0;
  double sigma = 0.0;
  Rational eps;
  uint64_t scan_n = 0;
  uint64_t hit_count = 0;
  uint64_t uncertain_count = 0;
  uint64_t shift_cap = 0;  // selected shifts stay <= M - ceil(M^(2/3))
  std::vector<uint64_t> selected_h;
  std::vector<std::vector<std::vector<uint64_t>>> counts;  // [selected][poly][piece-1]
  std::vector<HdWitness> witnesses;
  std::vector<PolyFailure> failures;
  bool pass = false;
};

// Polynomial-shift pipeline: dense interval and shift plan as in hd_certify,
// then shifts x0 + P_j(h) for h drawn from the X_eps scan, keeping only h
// with every P_j(h) >= 0 and the whole shifted box inside the carrier.
inline PolyCertificate poly_raimi_certify(const Coloring& coloring,
                                          const TorusPartitionSpec& spec,
                                          const std::vector<IntPolynomial>& polys,
                                          const PolyParams& params) {
  const Carrier& car = coloring.spec().carrier;
  if (car.kind != CarrierKind::Box || car.box_k != spec.k || car.n != params.M)
    throw PreconditionViolated("coloring carrier must match the box parameters");
  if (polys.empty()) throw PreconditionViolated("empty polynomial family");
  for (const auto& p : polys)
    if (p.degree() == 0 || p.leading() <= 0)
      throw PreconditionViolated("polynomials must have positive leading coefficients");

  PolyCertificate cert;
  DenseInterval dense = find_dense_interval(coloring, spec, params.delta_grid);
  cert.m = dense.m;
  cert.J_lo = dense.lo;
  cert.J_hi = dense.hi;

  ShiftPlan plan = plan_shift(dense.lo, dense.hi, spec, params.x0_max);
  cert.j_star = plan.j_star;
  cert.x0 = plan.x0;
  cert.sigma = plan.sigma;
  cert.eps = plan.eps;

  cert.scan_n = params.scan_n ? params.scan_n : params.M;
  XEpsReport scan = find_x_eps(spec.beta, polys, plan.eps, cert.scan_n, spec.cfg);
  cert.hit_count = scan.hits.size();
  cert.uncertain_count = scan.uncertain_count;
  cert.shift_cap = params.M - detail::ceil_pow23(params.M);

  for (uint64_t h : scan.hits) {
    if (cert.selected_h.size() >= params.max_selected) break;
    BigInt peak = 0;
    bool ok = true;
    for (const auto& p : polys) {
      BigInt v = p.eval(BigInt(h));
      if (v < 0) {
        ok = false;
        break;
      }
      peak = std::max(peak, v);
    }
    if (!ok || BigInt(plan.x0) + peak > cert.shift_cap) continue;
    cert.selected_h.push_back(h);
  }
  if (cert.selected_h.empty())
    throw SearchExhausted("no scan hit fits inside the box with the required margin");

  std::vector<uint64_t> bitmap = detail::class_bitmap(coloring, dense.m);
  detail::BoxCounter counter(spec, params.M);
  for (uint64_t h : cert.selected_h) {
    std::vector<std::vector<uint64_t>> per_poly;
    for (uint32_t j = 0; j < polys.size(); ++j) {
      uint64_t shift = plan.x0 + polys[j].eval(BigInt(h)).convert_to<uint64_t>();
      per_poly.push_back(counter.count(bitmap, shift, &cert.witnesses));
      for (uint32_t i = 0; i < spec.r; ++i)
        if (per_poly.back()[i] == 0) cert.failures.push_back({h, j + 1, i + 1});
    }
    cert.counts.push_back(std::move(per_poly));
  }
  cert.pass = cert.failures.empty();
  return cert;
}

}  // namespace raimi

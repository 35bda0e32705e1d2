#pragma once

#include <string>
#include <utility>
#include <vector>

#include "precise_real.hpp"

namespace raimi {

struct ContinuedFraction {
  std::vector<BigInt> partial_quotients;              // a_0, a_1, ...
  std::vector<std::pair<BigInt, BigInt>> convergents;  // (p_n, q_n)
  bool terminated = false;  // input was rational and fully expanded
};

namespace detail {

inline ContinuedFraction cf_of_rational(const Rational& v, size_t count) {
  ContinuedFraction cf;
  BigInt num = boost::multiprecision::numerator(v);
  BigInt den = boost::multiprecision::denominator(v);
  BigInt hm1 = 1, hm2 = 0, km1 = 0, km2 = 1;
  while (cf.partial_quotients.size() < count) {
    BigInt a = floor_div(num, den);
    BigInt h = a * hm1 + hm2, k = a * km1 + km2;
    cf.partial_quotients.push_back(a);
    cf.convergents.emplace_back(h, k);
    hm2 = hm1; hm1 = h; km2 = km1; km1 = k;
    BigInt rem = num - a * den;
    if (rem == 0) {
      cf.terminated = true;
      break;
    }
    num = den;
    den = rem;
  }
  return cf;
}

}  // namespace detail

// First `count` partial quotients and convergents. Quotients are emitted
// only while the evaluation enclosure certifies them (floor agrees on both
// endpoints); precision escalates until the request is met.
inline ContinuedFraction convergents_of(
    const RealExpr& x, size_t count,
    const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  if (count == 0) return {};
  if (x.is_rational()) return detail::cf_of_rational(x.rational_value(), count);
  for (unsigned esc = 0; esc <= cfg.max_escalations; ++esc) {
    unsigned bits = (cfg.precision_bits << esc) + cfg.guard_bits;
    PreciseReal v = x.eval(bits);
    Rational lo = v.lower(), hi = v.upper();
    ContinuedFraction cf;
    BigInt hm1 = 1, hm2 = 0, km1 = 0, km2 = 1;
    while (cf.partial_quotients.size() < count) {
      BigInt alo = floor_div(boost::multiprecision::numerator(lo),
                             boost::multiprecision::denominator(lo));
      BigInt ahi = floor_div(boost::multiprecision::numerator(hi),
                             boost::multiprecision::denominator(hi));
      if (alo != ahi) break;
      BigInt h = alo * hm1 + hm2, k = alo * km1 + km2;
      cf.partial_quotients.push_back(alo);
      cf.convergents.emplace_back(h, k);
      hm2 = hm1; hm1 = h; km2 = km1; km1 = k;
      Rational flo = lo - Rational(alo), fhi = hi - Rational(alo);
      if (flo == 0) break;  // next quotient unbounded at this precision
      lo = 1 / fhi;
      hi = 1 / flo;
    }
    if (cf.partial_quotients.size() >= count) return cf;
  }
  throw PrecisionExhausted("continued fraction: could not certify " +
                           std::to_string(count) + " partial quotients");
}

// Smallest convergent denominator q with certified dist_to_int(x*q) < eps.
inline BigInt small_norm_multiple(
    const RealExpr& x, const Rational& eps,
    const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  if (!(eps > 0 && eps < Rational(1, 2)))
    throw PreconditionViolated("small_norm_multiple: eps must lie in (0, 1/2)");
  size_t want = 16;
  size_t scanned = 0;
  while (true) {
    ContinuedFraction cf = convergents_of(x, want, cfg);
    for (; scanned < cf.convergents.size(); ++scanned) {
      const BigInt& q = cf.convergents[scanned].second;
      Ternary t = norm_less(x, q, eps, cfg);
      if (t == Ternary::True) return q;
      if (t == Ternary::Uncertain)
        throw PrecisionExhausted("small_norm_multiple: threshold uncertain at q=" + q.str());
    }
    if (cf.terminated)
      throw InternalInvariantBroken("small_norm_multiple: exact denominator rejected");
    want *= 2;
  }
}

}  // namespace raimi

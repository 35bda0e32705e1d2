#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "continued_fraction.hpp"
#include "precise_real.hpp"
#include "rng.hpp"

namespace raimi {

// Finite sequence x_1..x_K with certified dist_to_int(beta * x_k) < eps/2^k;
// every nonempty subset sum h then satisfies dist_to_int(beta*h) <
// eps*(1 - 2^-K) by the triangle inequality, which verify_fs re-checks.
struct FsSequence {
  RealExpr beta;
  Rational eps;
  std::vector<BigInt> elements;
  unsigned size() const { return static_cast<unsigned>(elements.size()); }
};

// Elements are the smallest convergent denominators meeting each level's
// bound, scanned in order with strictly increasing convergent index. For a
// rational beta = p/d the expansion terminates, so the multiples k*d (all
// with distance exactly 0) are used instead.
inline FsSequence build_fs(const RealExpr& beta, const Rational& eps, unsigned K,
                           const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  if (!(eps > 0 && eps < Rational(1, 2)))
    throw PreconditionViolated("build_fs: eps must lie in (0, 1/2)");
  FsSequence seq{beta, eps, {}};
  if (K == 0) return seq;
  if (beta.is_rational()) {
    BigInt d = boost::multiprecision::denominator(beta.rational_value());
    for (unsigned k = 1; k <= K; ++k) seq.elements.push_back(d * k);
    return seq;
  }
  size_t want = 16, idx = 0;
  ContinuedFraction cf = convergents_of(beta, want, cfg);
  Rational level = eps;
  for (unsigned k = 1; k <= K; ++k) {
    level /= 2;
    while (true) {
      if (idx >= cf.convergents.size()) {
        want *= 2;
        cf = convergents_of(beta, want, cfg);
      }
      const BigInt& q = cf.convergents[idx].second;
      ++idx;
      Ternary t = norm_less(beta, q, level, cfg);
      if (t == Ternary::True) {
        seq.elements.push_back(q);
        break;
      }
      if (t == Ternary::Uncertain)
        throw PrecisionExhausted("build_fs: threshold uncertain at q=" + q.str());
    }
  }
  return seq;
}

struct FsVerifyOptions {
  unsigned exhaustive_limit = 20;
  bool allow_sampling = false;   // K beyond the limit: sample instead of throwing
  uint64_t sample_count = 1u << 16;
  uint64_t seed = 0;
};

struct FsReport {
  bool pass = false;
  bool exhaustive = true;
  uint64_t checked = 0;
  uint64_t uncertain = 0;
  double max_norm = 0.0;   // midpoint estimate of the worst subset's distance
  uint64_t worst_mask = 0; // bit i selects elements[i]
  BigInt worst_sum = 0;
  double bound = 0.0;      // eps*(1 - 2^-K)
};

namespace detail {

// One certified subset check against num/den (threshold scaled by 2^bits as
// rhs_num = num << bits). d = folded distance numerator of the subset sum.
struct SubsetChecker {
  BigInt modulus;  // 2^bits
  BigInt den, rhs_num;
  unsigned bits;

  // Returns True/False/Uncertain for dist_to_int(value) < threshold where
  // value*2^bits lies in [s_sum - err_sum, s_sum + err_sum].
  Ternary check(const BigInt& s_sum, const BigInt& err_sum, BigInt* dist_out) const {
    BigInt r = s_sum - (floor_shift(s_sum, bits) << bits);
    BigInt other = modulus - r;
    BigInt d = std::min(r, other);
    if (dist_out) *dist_out = d;
    if ((d + err_sum) * den < rhs_num) return Ternary::True;
    if ((d - err_sum) * den >= rhs_num) return Ternary::False;
    return Ternary::Uncertain;
  }
};

}  // namespace detail

// Checks every nonempty subset sum (Gray-code walk) when K is within
// exhaustive_limit; otherwise samples, if allowed. Any outcome that is not a
// certified pass (including `uncertain` after escalation) fails the report.
inline FsReport verify_fs(const FsSequence& seq, const FsVerifyOptions& opt = {},
                          const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  const unsigned K = seq.size();
  FsReport rep;
  rep.bound = scaled_to_double(
      (boost::multiprecision::numerator(seq.eps) << 32) *
          (pow2(K) - 1) /
          (boost::multiprecision::denominator(seq.eps) * pow2(K)),
      32);
  if (K == 0) {
    rep.pass = true;
    return rep;
  }
  if (K > 63)
    throw ExhaustiveLimitExceeded("verify_fs: K exceeds the 63-bit mask limit");
  const bool exhaustive = K <= opt.exhaustive_limit;
  if (!exhaustive && !opt.allow_sampling)
    throw ExhaustiveLimitExceeded("verify_fs: K=" + std::to_string(K) +
                                  " exceeds exhaustive_limit=" +
                                  std::to_string(opt.exhaustive_limit));
  rep.exhaustive = exhaustive;

  Rational threshold = seq.eps * Rational(pow2(K) - 1, pow2(K));
  BigInt sum_all = 0;
  for (const BigInt& x : seq.elements) sum_all += x;
  unsigned bits = cfg.precision_bits + bit_length(sum_all) + cfg.guard_bits;
  PreciseReal b = seq.beta.eval(bits);

  detail::SubsetChecker chk;
  chk.modulus = pow2(bits);
  chk.bits = bits;
  chk.den = boost::multiprecision::denominator(threshold);
  chk.rhs_num = boost::multiprecision::numerator(threshold) << bits;

  std::vector<BigInt> scaled_x(K);
  for (unsigned i = 0; i < K; ++i) scaled_x[i] = b.scaled() * seq.elements[i];

  BigInt max_dist = -1;
  rep.pass = true;
  auto consider = [&](uint64_t mask, const BigInt& s_sum, const BigInt& subset_sum) {
    BigInt err_sum = b.err_ulp() * subset_sum;
    BigInt dist;
    Ternary t = chk.check(s_sum, err_sum, &dist);
    if (dist > max_dist) {
      max_dist = dist;
      rep.max_norm = scaled_to_double(dist, bits);
      rep.worst_mask = mask;
      rep.worst_sum = subset_sum;
    }
    if (t == Ternary::Uncertain)
      t = norm_less(seq.beta, subset_sum, threshold, cfg);
    if (t == Ternary::True) return;
    if (t == Ternary::Uncertain) ++rep.uncertain;
    rep.pass = false;
  };

  if (exhaustive) {
    // Gray-code walk: one element flips between consecutive masks.
    BigInt s_sum = 0, subset_sum = 0;
    uint64_t gray = 0;
    const uint64_t total = (uint64_t(1) << K) - 1;
    for (uint64_t m = 1; m <= total; ++m) {
      uint64_t next_gray = m ^ (m >> 1);
      uint64_t flipped = gray ^ next_gray;
      unsigned i = static_cast<unsigned>(__builtin_ctzll(flipped));
      if (next_gray & flipped) {
        s_sum += scaled_x[i];
        subset_sum += seq.elements[i];
      } else {
        s_sum -= scaled_x[i];
        subset_sum -= seq.elements[i];
      }
      gray = next_gray;
      consider(next_gray, s_sum, subset_sum);
      ++rep.checked;
    }
  } else {
    SplitMix rng(opt.seed);
    const uint64_t total = (uint64_t(1) << K) - 1;
    for (uint64_t n = 0; n < opt.sample_count; ++n) {
      uint64_t mask = 1 + rng.next_below(total);
      BigInt s_sum = 0, subset_sum = 0;
      for (unsigned i = 0; i < K; ++i)
        if (mask & (uint64_t(1) << i)) {
          s_sum += scaled_x[i];
          subset_sum += seq.elements[i];
        }
      consider(mask, s_sum, subset_sum);
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace raimi

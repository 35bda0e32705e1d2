#include <catch2/catch_amalgamated.hpp>

#include "raimi/precise_real.hpp"
#include "raimi/rng.hpp"

using namespace raimi;

namespace {

// Exact distance to the nearest integer for rationals; reference for the
// certified arithmetic below.
Rational exact_norm(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  BigInt r = num % den;
  if (r < 0) r += den;
  BigInt other = den - r;
  return Rational(std::min(r, other), den);
}

Rational exact_frac(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  BigInt r = num % den;
  if (r < 0) r += den;
  return Rational(r, den);
}

}  // namespace

TEST_CASE("fractional part of exact rationals") {
  auto x = PreciseReal::from_rational(Rational(9, 4), 256);
  CHECK(x.err_ulp() == 0);
  CHECK(x.frac_part().lower() == Rational(1, 4));
  CHECK(x.frac_part().upper() == Rational(1, 4));
  CHECK(x.integer_part() == 2);

  auto n = PreciseReal::from_rational(Rational(7), 128);
  CHECK(n.frac_part().lower() == 0);
  CHECK(n.dist_to_int().upper() == 0);
}

TEST_CASE("sqrt2 evaluation digits and error bound") {
  auto x = RealExpr::sqrt_int(2).eval(256);
  CHECK(x.frac_part().decimal_frac(10) == "0.4142135623");
  CHECK(x.err_ulp() <= 64);  // error at most 2^-250
  CHECK(x.integer_part() == 1);
}

TEST_CASE("distance to nearest integer") {
  auto a = PreciseReal::from_rational(Rational(3, 4), 256);
  CHECK(a.dist_to_int().lower() == Rational(1, 4));
  auto b = PreciseReal::from_rational(Rational(3), 256);
  CHECK(b.dist_to_int().upper() == 0);

  auto five_phi = RealExpr::golden().eval(256).mul_int(5);
  auto d = five_phi.dist_to_int();
  CHECK(d.decimal_frac(7) == "0.0901699");
  CHECK(std::abs(d.to_double() - 0.09016994374947424) < 1e-12);
}

TEST_CASE("log2 atom digits") {
  auto l3 = RealExpr::log2_int(3).eval(256);
  CHECK(l3.frac_part().decimal_frac(10) == "0.5849625007");
  CHECK(std::abs(l3.to_double() - 1.5849625007211562) < 1e-12);

  auto l15 = RealExpr::log2_int(15).eval(256);
  CHECK(l15.frac_part().decimal_frac(10) == "0.9068905956");
  CHECK(l15.err_ulp() <= 16);

  auto sum = RealExpr::log2_int(3) + RealExpr::log2_int(5);
  auto diff = sum.eval(320).sub(l15);
  CHECK(diff.dist_to_int().less_than(Rational(1, BigInt(1) << 200)) == Ternary::True);
}

TEST_CASE("three-valued comparisons round outward") {
  PreciseReal x(pow2(255), 2, 256);  // 1/2 with 2 ulp of slack
  CHECK(x.less_than(Rational(1, 2) + Rational(1, BigInt(1) << 250)) == Ternary::True);
  CHECK(x.less_than(Rational(1, 2)) == Ternary::Uncertain);
  CHECK(x.greater_than(Rational(1, 2)) == Ternary::Uncertain);
  CHECK(x.less_than(Rational(1, 4)) == Ternary::False);
  CHECK(x.greater_than(Rational(1, 4)) == Ternary::True);
}

TEST_CASE("frac_part near an integer stays an honest enclosure") {
  // Enclosure straddles 1: the result encloses x - 0, not {x}.
  PreciseReal x(pow2(256) - 1, 3, 256);
  auto f = x.frac_part();
  CHECK(f.upper() > 1);
  CHECK(f.less_than(Rational(1, 2)) == Ternary::False);
  // dist_to_int is wrap-safe.
  CHECK(x.dist_to_int().less_than(Rational(1, 1000)) == Ternary::True);
}

TEST_CASE("rational constructors collapse exactly") {
  CHECK(RealExpr::sqrt_int(4).is_rational());
  CHECK(RealExpr::sqrt_int(4).rational_value() == 2);
  CHECK(RealExpr::log2_int(8).is_rational());
  CHECK(RealExpr::log2_int(8).rational_value() == 3);
  CHECK_FALSE(RealExpr::sqrt_int(2).is_rational());
  CHECK_FALSE((RealExpr::golden() + RealExpr(Rational(1, 3))).is_rational());
  auto zero = RealExpr::sqrt_int(2) - RealExpr::sqrt_int(2);
  CHECK(zero.is_rational());
  CHECK(zero.rational_value() == 0);
}

TEST_CASE("norm properties on random rationals") {
  SplitMix rng(20260815);
  for (int trial = 0; trial < 1000; ++trial) {
    Rational a(static_cast<int64_t>(rng.next_below(20001)) - 10000,
               static_cast<int64_t>(rng.next_below(997)) + 1);
    Rational b(static_cast<int64_t>(rng.next_below(20001)) - 10000,
               static_cast<int64_t>(rng.next_below(997)) + 1);
    Rational na = exact_norm(a), nb = exact_norm(b);
    CHECK(exact_norm(a + b) <= na + nb);
    Rational d = na - nb;
    if (d < 0) d = -d;
    CHECK(d <= exact_norm(a - b));
    CHECK(exact_norm(exact_frac(a) - exact_frac(b)) == exact_norm(a - b));

    // Certified arithmetic must agree with the exact values outwardly.
    auto pa = PreciseReal::from_rational(a, 128);
    auto n = pa.dist_to_int();
    CHECK(n.less_than(na + Rational(1, 1000)) == Ternary::True);
    CHECK(n.less_than(na) != Ternary::True);
  }
}

TEST_CASE("norm_less escalates from deliberately low precision") {
  PrecisionConfig tiny{8, 4, 4};
  // dist_to_int(5*phi) = 0.090169..., far from both thresholds once
  // escalation raises the working precision.
  CHECK(norm_less(RealExpr::golden(), 5, Rational(9017, 100000), tiny) == Ternary::True);
  CHECK(norm_less(RealExpr::golden(), 5, Rational(9, 100), tiny) == Ternary::False);
  // An exactly-attained threshold can never be certified either way.
  PrecisionConfig cfg{64, 8, 2};
  CHECK(norm_less(RealExpr(Rational(1, 4)), 1, Rational(1, 4), cfg) == Ternary::False);
}

TEST_CASE("mixed-precision add aligns scales") {
  auto a = PreciseReal::from_rational(Rational(1, 3), 128);
  auto b = PreciseReal::from_rational(Rational(1, 6), 256);
  auto s = a.add(b);
  CHECK(s.bits() == 256);
  CHECK(s.dist_to_int().less_than(Rational(1, 2) + Rational(1, 1000)) == Ternary::True);
  CHECK(s.sub(PreciseReal::from_rational(Rational(1, 2), 256))
            .dist_to_int()
            .less_than(Rational(1, BigInt(1) << 100)) == Ternary::True);
}

TEST_CASE("expression descriptors are stable") {
  CHECK(RealExpr::sqrt_int(2).descriptor() == "sqrt:2");
  CHECK(RealExpr::log2_int(15).descriptor() == "log2:15");
  CHECK(RealExpr::golden().descriptor() == "golden");
  CHECK(RealExpr(Rational(1, 3)).descriptor() == "rat:1/3");
  auto combo = RealExpr::log2_int(3).scaled_by(2) + RealExpr(Rational(-1, 2));
  CHECK(combo.descriptor() == "2*log2:3+rat:-1/2");
}

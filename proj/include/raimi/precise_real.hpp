#pragma once

#include <mpfr.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace raimi {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Ternary { False, True, Uncertain };

struct PrecisionConfig {
  unsigned precision_bits = 256;
  unsigned guard_bits = 32;
  unsigned max_escalations = 4;

  // Honors the RAIMI_PRECISION_BITS environment variable.
  static PrecisionConfig defaults() {
    PrecisionConfig cfg;
    if (const char* env = std::getenv("RAIMI_PRECISION_BITS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v >= 64 && v <= 1 << 20) cfg.precision_bits = static_cast<unsigned>(v);
    }
    return cfg;
  }
};

inline unsigned bit_length(const BigInt& x) {
  if (x == 0) return 0;
  return static_cast<unsigned>(boost::multiprecision::msb(boost::multiprecision::abs(x))) + 1;
}

inline BigInt pow2(unsigned b) { return BigInt(1) << b; }

// Floor division by a power of two; cpp_int's >> is not specified for
// negative values, so route through the absolute value.
inline BigInt floor_shift(const BigInt& a, unsigned d) {
  if (d == 0) return a;
  if (a >= 0) return a >> d;
  return -((-a + (pow2(d) - 1)) >> d);
}

// Floor division for b > 0.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

inline double scaled_to_double(const BigInt& s, unsigned bits) {
  if (s == 0) return 0.0;
  BigInt a = boost::multiprecision::abs(s);
  unsigned len = bit_length(a);
  int drop = static_cast<int>(len) - 62;
  if (drop > 0) a >>= drop; else drop = 0;
  double d = a.convert_to<double>();
  d = std::ldexp(d, drop - static_cast<int>(bits));
  return s < 0 ? -d : d;
}

// Fixed-point enclosure of a real number: the represented value lies in
// [(scaled - err_ulp) / 2^bits, (scaled + err_ulp) / 2^bits].
class PreciseReal {
 public:
  PreciseReal() : scaled_(0), err_(0), bits_(0) {}
  PreciseReal(BigInt scaled, BigInt err_ulp, unsigned bits)
      : scaled_(std::move(scaled)), err_(std::move(err_ulp)), bits_(bits) {}

  static PreciseReal from_rational(const Rational& q, unsigned bits) {
    BigInt num = boost::multiprecision::numerator(q) << bits;
    BigInt den = boost::multiprecision::denominator(q);
    BigInt s = floor_div(num, den);
    BigInt e = (num % den == 0) ? 0 : 1;
    return PreciseReal(std::move(s), std::move(e), bits);
  }

  const BigInt& scaled() const { return scaled_; }
  const BigInt& err_ulp() const { return err_; }
  unsigned bits() const { return bits_; }

  BigInt integer_part() const { return floor_shift(scaled_, bits_); }
  // scaled mod 2^bits, in [0, 2^bits).
  BigInt frac_fixed() const { return scaled_ - (integer_part() << bits_); }

  PreciseReal add(const PreciseReal& o) const {
    auto [a, b] = aligned(o);
    return PreciseReal(a.scaled_ + b.scaled_, a.err_ + b.err_, a.bits_);
  }
  PreciseReal sub(const PreciseReal& o) const { return add(o.neg()); }
  PreciseReal neg() const { return PreciseReal(-scaled_, err_, bits_); }

  PreciseReal mul_int(const BigInt& m) const {
    return PreciseReal(scaled_ * m, err_ * boost::multiprecision::abs(m), bits_);
  }

  // Enclosure of x - floor(midpoint). When the enclosure straddles an
  // integer this is still a truthful enclosure of x - k for that fixed k,
  // but it is then not an enclosure of {x}; callers needing {x} must check
  // the result lies certifiedly inside [0,1).
  PreciseReal frac_part() const {
    return PreciseReal(frac_fixed(), err_, bits_);
  }

  // Enclosure of the distance from x to the nearest integer; relies on the
  // map being 1-Lipschitz, so the enclosure may dip below 0 near integers.
  PreciseReal dist_to_int() const {
    BigInt r = frac_fixed();
    BigInt d = std::min(r, pow2(bits_) - r);
    return PreciseReal(std::move(d), err_, bits_);
  }

  Rational lower() const { return Rational(scaled_ - err_, pow2(bits_)); }
  Rational upper() const { return Rational(scaled_ + err_, pow2(bits_)); }

  Ternary less_than(const Rational& q) const {
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    BigInt rhs = num << bits_;
    if ((scaled_ + err_) * den < rhs) return Ternary::True;
    if ((scaled_ - err_) * den >= rhs) return Ternary::False;
    return Ternary::Uncertain;
  }
  Ternary greater_than(const Rational& q) const {
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    BigInt rhs = num << bits_;
    if ((scaled_ - err_) * den > rhs) return Ternary::True;
    if ((scaled_ + err_) * den <= rhs) return Ternary::False;
    return Ternary::Uncertain;
  }

  double to_double() const { return scaled_to_double(scaled_, bits_); }

  // Decimal digits of the midpoint's fractional part, zero-padded:
  // "0.4142...". Intended for values whose err_ulp is far below the last
  // printed digit.
  std::string decimal_frac(unsigned digits) const {
    BigInt f = frac_fixed();
    BigInt p10 = 1;
    for (unsigned i = 0; i < digits; ++i) p10 *= 10;
    BigInt d = (f * p10) >> bits_;
    std::string body = d.str();
    if (body.size() < digits) body.insert(0, digits - body.size(), '0');
    return "0." + body;
  }

 private:
  std::pair<PreciseReal, PreciseReal> aligned(const PreciseReal& o) const {
    if (bits_ == o.bits_) return {*this, o};
    if (bits_ > o.bits_) {
      unsigned d = bits_ - o.bits_;
      return {*this, PreciseReal(o.scaled_ << d, o.err_ << d, bits_)};
    }
    unsigned d = o.bits_ - bits_;
    return {PreciseReal(scaled_ << d, err_ << d, o.bits_), o};
  }

  BigInt scaled_;
  BigInt err_;
  unsigned bits_;
};

enum class AtomKind : uint8_t { SqrtInt, Log2Int, Golden };

struct Atom {
  AtomKind kind;
  uint64_t n;  // sqrt / log argument; 0 for Golden
  auto operator<=>(const Atom&) const = default;
};

namespace detail {

inline BigInt bigint_from_mpz(const mpz_t z) {
  char* str = mpz_get_str(nullptr, 16, z);
  std::string s(str);
  void (*freefn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(str, s.size() + 1);
  bool negative = !s.empty() && s[0] == '-';
  BigInt v("0x" + (negative ? s.substr(1) : s));
  return negative ? -v : v;
}

// Certified enclosures of the atom values, scaled by 2^bits.
// sqrt: exact integer square root. log2: MPFR with directed rounding.
inline std::pair<BigInt, BigInt> atom_enclosure(const Atom& a, unsigned bits) {
  switch (a.kind) {
    case AtomKind::SqrtInt: {
      BigInt s = boost::multiprecision::sqrt(BigInt(a.n) << (2 * bits));
      return {std::move(s), 1};
    }
    case AtomKind::Golden: {
      BigInt s5 = boost::multiprecision::sqrt(BigInt(5) << (2 * bits));
      BigInt num = pow2(bits) + s5;
      return {num >> 1, 2};
    }
    case AtomKind::Log2Int: {
      mpfr_t lo, hi;
      mpfr_init2(lo, bits + 16);
      mpfr_init2(hi, bits + 16);
      mpfr_set_ui(lo, static_cast<unsigned long>(a.n), MPFR_RNDD);
      mpfr_set_ui(hi, static_cast<unsigned long>(a.n), MPFR_RNDU);
      mpfr_log2(lo, lo, MPFR_RNDD);
      mpfr_log2(hi, hi, MPFR_RNDU);
      mpfr_mul_2ui(lo, lo, bits, MPFR_RNDD);
      mpfr_mul_2ui(hi, hi, bits, MPFR_RNDU);
      mpz_t zlo, zhi;
      mpz_init(zlo);
      mpz_init(zhi);
      mpfr_get_z(zlo, lo, MPFR_RNDD);
      mpfr_get_z(zhi, hi, MPFR_RNDU);
      BigInt blo = bigint_from_mpz(zlo);
      BigInt bhi = bigint_from_mpz(zhi);
      mpz_clear(zlo);
      mpz_clear(zhi);
      mpfr_clear(lo);
      mpfr_clear(hi);
      return {blo, bhi - blo + 1};
    }
  }
  throw InternalInvariantBroken("unknown atom kind");
}

inline std::pair<BigInt, BigInt> atom_value(const Atom& a, unsigned bits) {
  static std::map<std::pair<Atom, unsigned>, std::pair<BigInt, BigInt>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(a, bits);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, atom_enclosure(a, bits)).first;
  return it->second;
}

inline bool is_perfect_square(uint64_t n, uint64_t& root) {
  BigInt r = boost::multiprecision::sqrt(BigInt(n));
  if (r * r == n) {
    root = r.convert_to<uint64_t>();
    return true;
  }
  return false;
}

inline bool is_power_of_two(uint64_t n, unsigned& exp) {
  if (n == 0 || (n & (n - 1)) != 0) return false;
  exp = 0;
  while ((n >> exp) != 1) ++exp;
  return true;
}

}  // namespace detail

// Q-linear combination of irrational atoms plus a rational offset; closed
// under +, -, and integer scaling. Evaluation returns a certified
// PreciseReal enclosure at any requested precision.
class RealExpr {
 public:
  RealExpr() = default;
  explicit RealExpr(Rational offset) : offset_(std::move(offset)) {}

  static RealExpr sqrt_int(uint64_t n) {
    uint64_t root = 0;
    if (detail::is_perfect_square(n, root)) return RealExpr(Rational(root));
    RealExpr e;
    e.coeffs_[Atom{AtomKind::SqrtInt, n}] = 1;
    return e;
  }
  static RealExpr log2_int(uint64_t m) {
    if (m == 0) throw PreconditionViolated("log2 argument must be positive");
    unsigned exp = 0;
    if (detail::is_power_of_two(m, exp)) return RealExpr(Rational(exp));
    RealExpr e;
    e.coeffs_[Atom{AtomKind::Log2Int, m}] = 1;
    return e;
  }
  static RealExpr golden() {
    RealExpr e;
    e.coeffs_[Atom{AtomKind::Golden, 0}] = 1;
    return e;
  }
  static RealExpr rational(Rational q) { return RealExpr(std::move(q)); }

  RealExpr operator+(const RealExpr& o) const {
    RealExpr r = *this;
    for (const auto& [a, c] : o.coeffs_) {
      BigInt& slot = r.coeffs_[a];
      slot += c;
      if (slot == 0) r.coeffs_.erase(a);
    }
    r.offset_ += o.offset_;
    return r;
  }
  RealExpr operator-(const RealExpr& o) const { return *this + o.scaled_by(-1); }

  RealExpr scaled_by(const BigInt& c) const {
    RealExpr r;
    if (c != 0) {
      for (const auto& [a, co] : coeffs_) r.coeffs_[a] = co * c;
      r.offset_ = offset_ * Rational(c);
    }
    return r;
  }
  RealExpr plus_rational(const Rational& q) const {
    RealExpr r = *this;
    r.offset_ += q;
    return r;
  }

  bool is_rational() const { return coeffs_.empty(); }
  const Rational& offset() const { return offset_; }
  Rational rational_value() const {
    if (!is_rational()) throw PreconditionViolated("value is not rational");
    return offset_;
  }

  PreciseReal eval(unsigned bits) const {
    if (coeffs_.empty()) return PreciseReal::from_rational(offset_, bits);
    BigInt csum = 1;
    for (const auto& [a, c] : coeffs_) csum += boost::multiprecision::abs(c);
    unsigned wp = bits + bit_length(csum) + 10;
    wp = (wp + 63) & ~63u;  // quantize for atom-cache hits
    BigInt acc = 0, err = 0;
    for (const auto& [a, c] : coeffs_) {
      auto [s, e] = detail::atom_value(a, wp);
      acc += c * s;
      err += boost::multiprecision::abs(c) * e;
    }
    if (offset_ != 0) {
      BigInt num = boost::multiprecision::numerator(offset_) << wp;
      BigInt den = boost::multiprecision::denominator(offset_);
      acc += floor_div(num, den);
      if (num % den != 0) err += 1;
    }
    unsigned d = wp - bits;
    return PreciseReal(floor_shift(acc, d), (err >> d) + 2, bits);
  }

  // Stable text form used in JSON artifacts: "sqrt:2", "log2:15", "golden",
  // "rat:p/q", joined with '+' for sums; integer coefficients prefixed "c*".
  std::string descriptor() const {
    std::string out;
    for (const auto& [a, c] : coeffs_) {
      if (!out.empty()) out += "+";
      if (c != 1) out += c.str() + "*";
      switch (a.kind) {
        case AtomKind::SqrtInt: out += "sqrt:" + std::to_string(a.n); break;
        case AtomKind::Log2Int: out += "log2:" + std::to_string(a.n); break;
        case AtomKind::Golden: out += "golden"; break;
      }
    }
    if (offset_ != 0 || out.empty()) {
      if (!out.empty()) out += "+";
      out += "rat:" + boost::multiprecision::numerator(offset_).str() + "/" +
             boost::multiprecision::denominator(offset_).str();
    }
    return out;
  }

  bool operator==(const RealExpr& o) const {
    return coeffs_ == o.coeffs_ && offset_ == o.offset_;
  }

 private:
  std::map<Atom, BigInt> coeffs_;
  Rational offset_;
};

// Certified test of dist_to_int(x * mult) < eps with automatic precision
// escalation; Uncertain only if max_escalations is exhausted.
inline Ternary norm_less(const RealExpr& x, const BigInt& mult, const Rational& eps,
                         const PrecisionConfig& cfg = PrecisionConfig::defaults()) {
  unsigned extra = bit_length(mult) + cfg.guard_bits;
  for (unsigned esc = 0; esc <= cfg.max_escalations; ++esc) {
    unsigned bits = (cfg.precision_bits << esc) + extra;
    Ternary t = x.eval(bits).mul_int(mult).dist_to_int().less_than(eps);
    if (t != Ternary::Uncertain) return t;
  }
  return Ternary::Uncertain;
}

// Enclosure of dist_to_int(x * mult) for reporting.
inline PreciseReal norm_value(const RealExpr& x, const BigInt& mult, unsigned bits) {
  return x.eval(bits + bit_length(mult) + 8).mul_int(mult).dist_to_int();
}

}  // namespace raimi

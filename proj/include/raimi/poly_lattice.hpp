#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "intmat.hpp"
#include "precise_real.hpp"
#include "rng.hpp"

namespace raimi {

// Integer polynomial with zero constant term, stored as c_1..c_d.
struct IntPolynomial {
  std::vector<BigInt> coeffs;

  size_t degree() const { return coeffs.size(); }
  const BigInt& leading() const { return coeffs.back(); }

  BigInt eval(const BigInt& n) const {
    BigInt acc = 0;
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * n + coeffs[i];
    return acc * n;
  }

  std::string text() const {
    std::string out;
    for (size_t i = coeffs.size(); i-- > 0;) {
      const BigInt& c = coeffs[i];
      if (c == 0) continue;
      if (!out.empty()) out += (c > 0) ? "+" : "-";
      else if (c < 0)
        out += "-";
      BigInt a = boost::multiprecision::abs(c);
      if (a != 1) out += a.str();
      out += "x";
      if (i > 0) out += "^" + std::to_string(i + 1);
    }
    return out;
  }

  static IntPolynomial parse(const std::string& raw);
};

inline IntPolynomial IntPolynomial::parse(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw PreconditionViolated("empty polynomial");

  std::vector<BigInt> coeffs;
  size_t i = 0;
  while (i < s.size()) {
    BigInt sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      if (s[i] == '-') sign = -1;
      ++i;
    } else if (i != 0) {
      throw PreconditionViolated("expected '+' or '-' between terms: " + raw);
    }
    std::string digits;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
    if (i >= s.size() || s[i] != 'x')
      throw PreconditionViolated("constant terms are not allowed: " + raw);
    ++i;
    uint64_t deg = 1;
    if (i < s.size() && s[i] == '^') {
      ++i;
      std::string dstr;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) dstr += s[i++];
      if (dstr.empty()) throw PreconditionViolated("missing exponent: " + raw);
      deg = std::stoull(dstr);
      if (deg == 0) throw PreconditionViolated("exponent 0 makes a constant term: " + raw);
      if (deg > 64) throw PreconditionViolated("exponent too large: " + raw);
    }
    BigInt c = digits.empty() ? BigInt(1) : BigInt(digits);
    if (coeffs.size() < deg) coeffs.resize(deg, 0);
    coeffs[deg - 1] += sign * c;
  }
  while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.empty()) throw PreconditionViolated("zero polynomial: " + raw);
  return IntPolynomial{std::move(coeffs)};
}

inline std::vector<IntPolynomial> parse_poly_family(const std::string& s) {
  std::vector<IntPolynomial> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(IntPolynomial::parse(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

// Integer lattice of vanishing combinations m_1 P_1 + ... + m_f P_f = 0.
struct RelationLattice {
  size_t f = 0;
  Mat basis;  // HNF rows, possibly empty
  size_t rank() const { return basis.size(); }
};

inline RelationLattice relation_lattice(const std::vector<IntPolynomial>& polys) {
  if (polys.empty()) throw PreconditionViolated("empty polynomial family");
  size_t f = polys.size(), dmax = 0;
  for (auto& p : polys) dmax = std::max(dmax, p.degree());
  Mat A(f, std::vector<BigInt>(dmax, 0));
  for (size_t i = 0; i < f; ++i)
    for (size_t j = 0; j < polys[i].degree(); ++j) A[i][j] = polys[i].coeffs[j];
  return RelationLattice{f, left_kernel_basis(A)};
}

// Closed subgroup of T^f annihilated by the relation lattice.
// z in H  <=>  d_i * (W z)_i integral for i < s; coordinates s..f-1 are free
// through the parametrization z = Winv * w.
struct SubtorusH {
  size_t f = 0;
  Mat relations;
  std::vector<BigInt> d;
  Mat W;     // unimodular f x f
  Mat Winv;  // its inverse, columns parametrize H
  size_t dim = 0;
  BigInt component_count = 1;

  bool member(const std::vector<Rational>& z) const {
    if (z.size() != f) throw PreconditionViolated("point dimension mismatch");
    for (size_t i = 0; i < d.size(); ++i) {
      Rational u = 0;
      for (size_t j = 0; j < f; ++j) u += Rational(W[i][j]) * z[j];
      u *= Rational(d[i]);
      if (boost::multiprecision::denominator(u) != 1) return false;
    }
    return true;
  }

  std::vector<Rational> sample_haar(SplitMix& rng) const {
    std::vector<Rational> w(f);
    for (size_t i = 0; i < d.size(); ++i) {
      uint64_t di = static_cast<uint64_t>(d[i]);
      w[i] = Rational(BigInt(rng.next_below(di)), d[i]);
    }
    for (size_t i = d.size(); i < f; ++i)
      w[i] = Rational(BigInt(rng.next_bits53()), BigInt(1) << 53);
    std::vector<Rational> z(f, 0);
    for (size_t i = 0; i < f; ++i) {
      for (size_t j = 0; j < f; ++j) z[i] += Rational(Winv[i][j]) * w[j];
      z[i] -= Rational(floor_div(boost::multiprecision::numerator(z[i]),
                                 boost::multiprecision::denominator(z[i])));
    }
    return z;
  }
};

inline SubtorusH subtorus_param(const RelationLattice& R) {
  SubtorusH H;
  H.f = R.f;
  H.relations = R.basis;
  if (R.basis.empty()) {
    H.W = identity_mat(R.f);
    H.Winv = identity_mat(R.f);
    H.dim = R.f;
    return H;
  }
  SnfResult s = smith_normal_form(R.basis);
  if (s.d.size() != R.basis.size())
    throw InternalInvariantBroken("relation basis rows are dependent");
  H.d = s.d;
  H.W = s.W;
  H.Winv = s.R;
  H.dim = R.f - s.d.size();
  for (auto& di : s.d) H.component_count *= di;
  return H;
}

struct MeasureEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  uint64_t hits = 0;
  uint64_t samples = 0;
};

namespace detail {

// ||x|| for rational x, as a rational in [0, 1/2]
inline Rational rat_circle_norm(const Rational& x) {
  Rational fr = x - Rational(floor_div(boost::multiprecision::numerator(x),
                                       boost::multiprecision::denominator(x)));
  Rational other = 1 - fr;
  return fr < other ? fr : other;
}

inline BigInt rat_floor(const Rational& x) {
  return floor_div(boost::multiprecision::numerator(x),
                   boost::multiprecision::denominator(x));
}
inline BigInt rat_ceil(const Rational& x) { return -rat_floor(-x); }

using Pt2 = std::pair<Rational, Rational>;
using Poly2 = std::vector<Pt2>;

// keep the side a1*x + a2*y <= c
inline Poly2 clip_half_plane(const Poly2& poly, const Rational& a1, const Rational& a2,
                             const Rational& c) {
  Poly2 out;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Pt2& P = poly[i];
    const Pt2& Q = poly[(i + 1) % n];
    Rational sp = a1 * P.first + a2 * P.second - c;
    Rational sq = a1 * Q.first + a2 * Q.second - c;
    bool in_p = sp <= 0, in_q = sq <= 0;
    if (in_p) out.push_back(P);
    if (in_p != in_q) {
      Rational t = sp / (sp - sq);
      out.emplace_back(P.first + t * (Q.first - P.first),
                       P.second + t * (Q.second - P.second));
    }
  }
  return out;
}

inline Rational poly_area(const Poly2& poly) {
  Rational s = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Pt2& P = poly[i];
    const Pt2& Q = poly[(i + 1) % n];
    s += P.first * Q.second - Q.first * P.second;
  }
  if (s < 0) s = -s;
  return s / 2;
}

// length of {w in [0,1) : ||a_i w|| < eps for all i}, a_i integers
inline Rational exact_measure_dim1(const std::vector<BigInt>& a, const Rational& eps) {
  std::vector<std::pair<Rational, Rational>> region{{Rational(0), Rational(1)}};
  for (const BigInt& ai_raw : a) {
    BigInt ai = boost::multiprecision::abs(ai_raw);
    if (ai == 0) continue;
    std::vector<std::pair<Rational, Rational>> bands;
    for (BigInt n = 0; n <= ai; ++n) {
      Rational lo = (Rational(n) - eps) / Rational(ai);
      Rational hi = (Rational(n) + eps) / Rational(ai);
      if (lo < 0) lo = 0;
      if (hi > 1) hi = 1;
      if (lo < hi) bands.emplace_back(lo, hi);
    }
    std::vector<std::pair<Rational, Rational>> next;
    for (auto& r : region)
      for (auto& b : bands) {
        Rational lo = std::max(r.first, b.first), hi = std::min(r.second, b.second);
        if (lo < hi) next.emplace_back(lo, hi);
      }
    region = std::move(next);
  }
  Rational total = 0;
  for (auto& r : region) total += r.second - r.first;
  return total;
}

// area of {w in [0,1)^2 : ||a_i . w|| < eps for all i}, rows a_i integer pairs
inline Rational exact_measure_dim2(const std::vector<std::array<BigInt, 2>>& rows,
                                   const Rational& eps) {
  std::vector<Poly2> region{
      {{Rational(0), Rational(0)}, {Rational(1), Rational(0)},
       {Rational(1), Rational(1)}, {Rational(0), Rational(1)}}};
  for (const auto& a : rows) {
    if (a[0] == 0 && a[1] == 0) continue;
    Rational lo_val = 0, hi_val = 0;
    for (int bx = 0; bx <= 1; ++bx)
      for (int by = 0; by <= 1; ++by) {
        Rational v = Rational(a[0]) * bx + Rational(a[1]) * by;
        lo_val = std::min(lo_val, v);
        hi_val = std::max(hi_val, v);
      }
    std::vector<Poly2> next;
    for (BigInt n = rat_ceil(lo_val - eps); n <= rat_floor(hi_val + eps); ++n)
      for (const Poly2& p : region) {
        Poly2 piece = clip_half_plane(p, Rational(a[0]), Rational(a[1]), Rational(n) + eps);
        piece = clip_half_plane(piece, -Rational(a[0]), -Rational(a[1]), eps - Rational(n));
        if (piece.size() >= 3) next.push_back(std::move(piece));
      }
    region = std::move(next);
  }
  Rational total = 0;
  for (const Poly2& p : region) total += poly_area(p);
  return total;
}

// Wilson 95% interval for a binomial proportion.
inline std::pair<double, double> wilson95(uint64_t hits, uint64_t samples) {
  double n = static_cast<double>(samples);
  double p = static_cast<double>(hits) / n;
  const double zq = 1.959963984540054;
  double z2 = zq * zq;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = zq * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace detail

// Exact Haar measure of (-eps, eps)^f on H when the geometry is simple
// enough: no torsion constraints at all, or trivial torsion with at most
// two free coordinates. Returns nullopt otherwise.
inline std::optional<Rational> haar_box_measure_exact(const SubtorusH& H,
                                                      const Rational& eps) {
  if (!(eps > 0 && eps < Rational(1, 2)))
    throw PreconditionViolated("eps must lie in (0, 1/2)");
  if (H.d.empty()) {
    Rational m = 1;
    for (size_t i = 0; i < H.f; ++i) m *= 2 * eps;
    return m;
  }
  for (auto& di : H.d)
    if (di != 1) return std::nullopt;
  if (H.dim == 0) return Rational(1);  // H = {0}, always inside the box
  size_t s = H.d.size();
  if (H.dim == 1) {
    std::vector<BigInt> a(H.f);
    for (size_t i = 0; i < H.f; ++i) a[i] = H.Winv[i][s];
    return detail::exact_measure_dim1(a, eps);
  }
  if (H.dim == 2) {
    std::vector<std::array<BigInt, 2>> rows(H.f);
    for (size_t i = 0; i < H.f; ++i) rows[i] = {H.Winv[i][s], H.Winv[i][s + 1]};
    return detail::exact_measure_dim2(rows, eps);
  }
  return std::nullopt;
}

// Monte-Carlo estimate of the Haar measure of (-eps, eps)^f on H with a
// Wilson 95% confidence interval.
inline MeasureEstimate haar_box_measure(const SubtorusH& H, const Rational& eps,
                                        uint64_t samples, uint64_t seed) {
  if (!(eps > 0 && eps < Rational(1, 2)))
    throw PreconditionViolated("eps must lie in (0, 1/2)");
  if (samples == 0) throw PreconditionViolated("need at least one sample");
  SplitMix rng(seed);
  uint64_t hits = 0;
  for (uint64_t t = 0; t < samples; ++t) {
    std::vector<Rational> z = H.sample_haar(rng);
    bool inside = true;
    for (size_t i = 0; i < H.f && inside; ++i)
      inside = detail::rat_circle_norm(z[i]) < eps;
    if (inside) ++hits;
  }
  MeasureEstimate out;
  out.hits = hits;
  out.samples = samples;
  out.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  std::tie(out.ci_low, out.ci_high) = detail::wilson95(hits, samples);
  return out;
}

}  // namespace raimi

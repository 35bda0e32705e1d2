#include <catch2/catch_amalgamated.hpp>

#include "raimi/poly_lattice.hpp"

using namespace raimi;

namespace {

IntPolynomial P(const std::string& s) { return IntPolynomial::parse(s); }

// rational row echelon; returns rank and (optionally) a basis of the left
// kernel of A computed from free-variable parametrization, rows scaled to
// primitive integer vectors
struct RatKernel {
  size_t rank = 0;
  Mat scaled_basis;
};

RatKernel rational_left_kernel(const Mat& A) {
  size_t m = A.size(), n = A.empty() ? 0 : A[0].size();
  // eliminate on A^T x = 0 viewpoint: work on rows of A with an augmented
  // identity to track combinations, like [A | I] row reduction
  std::vector<std::vector<Rational>> M(m, std::vector<Rational>(n + m, 0));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) M[i][j] = Rational(A[i][j]);
    M[i][n + i] = 1;
  }
  size_t r = 0;
  for (size_t c = 0; c < n && r < m; ++c) {
    size_t piv = r;
    while (piv < m && M[piv][c] == 0) ++piv;
    if (piv == m) continue;
    std::swap(M[piv], M[r]);
    Rational inv = 1 / M[r][c];
    for (size_t j = 0; j < n + m; ++j) M[r][j] *= inv;
    for (size_t i = 0; i < m; ++i) {
      if (i == r || M[i][c] == 0) continue;
      Rational q = M[i][c];
      for (size_t j = 0; j < n + m; ++j) M[i][j] -= q * M[r][j];
    }
    ++r;
  }
  RatKernel out;
  out.rank = r;
  for (size_t i = r; i < m; ++i) {
    // row i of the augmented part combines A-rows to zero; scale primitive
    BigInt lcm = 1;
    for (size_t j = 0; j < m; ++j)
      lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(M[i][n + j]));
    std::vector<BigInt> v(m);
    BigInt g = 0;
    for (size_t j = 0; j < m; ++j) {
      Rational scaled = M[i][n + j] * Rational(lcm);
      v[j] = boost::multiprecision::numerator(scaled);
      g = boost::multiprecision::gcd(g, v[j]);
    }
    if (g > 1)
      for (auto& x : v) x /= g;
    out.scaled_basis.push_back(std::move(v));
  }
  return out;
}

Mat coeff_matrix(const std::vector<IntPolynomial>& fam) {
  size_t dmax = 0;
  for (auto& p : fam) dmax = std::max(dmax, p.degree());
  Mat A(fam.size(), std::vector<BigInt>(dmax, 0));
  for (size_t i = 0; i < fam.size(); ++i)
    for (size_t j = 0; j < fam[i].degree(); ++j) A[i][j] = fam[i].coeffs[j];
  return A;
}

}  // namespace

TEST_CASE("polynomial text form parses and evaluates") {
  IntPolynomial p = P("x^2+3x");
  REQUIRE(p.degree() == 2);
  REQUIRE(p.coeffs == (std::vector<BigInt>{3, 1}));
  REQUIRE(p.eval(5) == 40);
  REQUIRE(p.eval(0) == 0);
  REQUIRE(p.text() == "x^2+3x");

  IntPolynomial q = P("2x^3 - x");
  REQUIRE(q.eval(4) == 124);
  REQUIRE(q.text() == "2x^3-x");

  REQUIRE(P("x").eval(9) == 9);
  REQUIRE(P("-x^2+x^2+x").text() == "x");
  REQUIRE(P("x+x").coeffs == (std::vector<BigInt>{2}));

  REQUIRE_THROWS_AS(P(""), PreconditionViolated);
  REQUIRE_THROWS_AS(P("3"), PreconditionViolated);
  REQUIRE_THROWS_AS(P("x+1"), PreconditionViolated);
  REQUIRE_THROWS_AS(P("x^0"), PreconditionViolated);
  REQUIRE_THROWS_AS(P("x^2-x^2"), PreconditionViolated);

  auto fam = parse_poly_family("x,x^2");
  REQUIRE(fam.size() == 2);
  REQUIRE(fam[1].degree() == 2);
}

TEST_CASE("horner evaluation matches power sums") {
  SplitMix rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    size_t deg = 1 + rng.next_below(6);
    IntPolynomial p;
    p.coeffs.resize(deg);
    for (auto& c : p.coeffs) c = static_cast<long>(rng.next_below(19)) - 9;
    if (p.coeffs.back() == 0) p.coeffs.back() = 1;
    BigInt n = rng.next_below(1000);
    BigInt direct = 0, pw = n;
    for (size_t j = 0; j < deg; ++j, pw *= n) direct += p.coeffs[j] * pw;
    REQUIRE(p.eval(n) == direct);
  }
}

TEST_CASE("relation lattices of the reference families") {
  RelationLattice r1 = relation_lattice({P("x"), P("x^2")});
  REQUIRE(r1.rank() == 0);
  REQUIRE(r1.basis.empty());

  RelationLattice r2 = relation_lattice({P("x"), P("x^2"), P("x+x^2")});
  REQUIRE(r2.basis == (Mat{{BigInt(1), BigInt(1), BigInt(-1)}}));

  RelationLattice r3 = relation_lattice({P("2x"), P("x")});
  REQUIRE(r3.basis == (Mat{{BigInt(1), BigInt(-2)}}));
}

TEST_CASE("basis rows annihilate the family identically") {
  SplitMix rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    size_t f = 1 + rng.next_below(4);
    std::vector<IntPolynomial> fam(f);
    for (auto& p : fam) {
      p.coeffs.resize(1 + rng.next_below(5));
      for (auto& c : p.coeffs) c = static_cast<long>(rng.next_below(19)) - 9;
      if (p.coeffs.back() == 0) p.coeffs.back() = 3;
    }
    RelationLattice R = relation_lattice(fam);
    size_t dmax = 0;
    for (auto& p : fam) dmax = std::max(dmax, p.degree());
    for (auto& m : R.basis)
      for (size_t j = 0; j < dmax; ++j) {
        BigInt s = 0;
        for (size_t i = 0; i < f; ++i)
          if (j < fam[i].degree()) s += m[i] * fam[i].coeffs[j];
        REQUIRE(s == 0);
      }
  }
}

TEST_CASE("subtorus parametrization of the reference lattices") {
  SubtorusH full = subtorus_param(relation_lattice({P("x"), P("x^2")}));
  REQUIRE(full.dim == 2);
  REQUIRE(full.component_count == 1);
  REQUIRE(full.d.empty());

  SubtorusH plane = subtorus_param(relation_lattice({P("x"), P("x^2"), P("x+x^2")}));
  REQUIRE(plane.dim == 2);
  REQUIRE(plane.d == std::vector<BigInt>{1});
  REQUIRE(plane.component_count == 1);
  REQUIRE(mat_mul(plane.W, plane.Winv) == identity_mat(3));

  RelationLattice two;
  two.f = 2;
  two.basis = {{BigInt(2), BigInt(0)}};
  SubtorusH halves = subtorus_param(two);
  REQUIRE(halves.dim == 1);
  REQUIRE(halves.d == std::vector<BigInt>{2});
  REQUIRE(halves.component_count == 2);
}

TEST_CASE("haar samples satisfy membership and annihilation") {
  auto fams = std::vector<std::vector<IntPolynomial>>{
      {P("x"), P("x^2"), P("x+x^2")},
      {P("2x"), P("x")},
      {P("x"), P("x^3"), P("2x+x^3"), P("x^2")},
  };
  for (auto& fam : fams) {
    SubtorusH H = subtorus_param(relation_lattice(fam));
    SplitMix rng(31337);
    for (int t = 0; t < 100; ++t) {
      auto z = H.sample_haar(rng);
      REQUIRE(z.size() == H.f);
      for (auto& zi : z) {
        REQUIRE(zi >= 0);
        REQUIRE(zi < 1);
      }
      REQUIRE(H.member(z));
      for (auto& m : H.relations) {
        Rational dot = 0;
        for (size_t i = 0; i < H.f; ++i) dot += Rational(m[i]) * z[i];
        REQUIRE(boost::multiprecision::denominator(dot) == 1);
      }
    }
  }

  // torsion components are actually visited
  RelationLattice two;
  two.f = 2;
  two.basis = {{BigInt(2), BigInt(0)}};
  SubtorusH halves = subtorus_param(two);
  SplitMix rng(7);
  bool saw_zero = false, saw_half = false;
  for (int t = 0; t < 100; ++t) {
    auto z = halves.sample_haar(rng);
    REQUIRE(halves.member(z));
    Rational z1 = z[0];
    if (z1 == 0) saw_zero = true;
    if (z1 == Rational(1, 2)) saw_half = true;
  }
  REQUIRE(saw_zero);
  REQUIRE(saw_half);

  // a point off the subtorus is rejected
  REQUIRE_FALSE(halves.member({Rational(1, 3), Rational(1, 7)}));
}

TEST_CASE("exact box measures on the reference subtori") {
  Rational eps(1, 10);

  SubtorusH full = subtorus_param(relation_lattice({P("x"), P("x^2")}));
  auto m1 = haar_box_measure_exact(full, eps);
  REQUIRE(m1.has_value());
  REQUIRE(*m1 == Rational(1, 25));

  SubtorusH plane = subtorus_param(relation_lattice({P("x"), P("x^2"), P("x+x^2")}));
  auto m2 = haar_box_measure_exact(plane, eps);
  REQUIRE(m2.has_value());
  REQUIRE(*m2 == Rational(3, 100));

  SubtorusH line = subtorus_param(relation_lattice({P("2x"), P("x")}));
  auto m3 = haar_box_measure_exact(line, eps);
  REQUIRE(m3.has_value());
  REQUIRE(*m3 == Rational(1, 10));

  // torsion d=2 falls back to sampling
  RelationLattice two;
  two.f = 2;
  two.basis = {{BigInt(2), BigInt(0)}};
  REQUIRE_FALSE(haar_box_measure_exact(subtorus_param(two), eps).has_value());

  // box nearly covering the torus
  auto big = haar_box_measure_exact(full, Rational(499, 1000));
  REQUIRE(*big == Rational(998 * 998, 1000000));

  REQUIRE_THROWS_AS(haar_box_measure_exact(full, Rational(1, 2)), PreconditionViolated);
  REQUIRE_THROWS_AS(haar_box_measure_exact(full, Rational(0)), PreconditionViolated);
}

TEST_CASE("monte carlo estimates track exact values") {
  Rational eps(1, 10);

  SubtorusH plane = subtorus_param(relation_lattice({P("x"), P("x^2"), P("x+x^2")}));
  MeasureEstimate est = haar_box_measure(plane, eps, 20000, 424242);
  REQUIRE(est.samples == 20000);
  REQUIRE(est.ci_low <= 0.03);
  REQUIRE(est.ci_high >= 0.03);
  REQUIRE(std::abs(est.estimate - 0.03) < 0.01);

  // determinism
  MeasureEstimate again = haar_box_measure(plane, eps, 20000, 424242);
  REQUIRE(again.hits == est.hits);

  // torsion case without an exact path: components z1 in {0, 1/2}; only the
  // identity component can meet the box, so the measure is eps
  RelationLattice two;
  two.f = 2;
  two.basis = {{BigInt(2), BigInt(0)}};
  MeasureEstimate t = haar_box_measure(subtorus_param(two), eps, 20000, 99);
  REQUIRE(std::abs(t.estimate - 0.1) < 0.01);
  REQUIRE(t.ci_low <= 0.1);
  REQUIRE(t.ci_high >= 0.1);
}

TEST_CASE("lattice agrees with saturated rational kernel on random families") {
  SplitMix rng(160914);
  for (int trial = 0; trial < 100; ++trial) {
    size_t f = 1 + rng.next_below(4);
    std::vector<IntPolynomial> fam(f);
    for (auto& p : fam) {
      p.coeffs.resize(1 + rng.next_below(5));
      for (auto& c : p.coeffs) c = static_cast<long>(rng.next_below(19)) - 9;
      if (p.coeffs.back() == 0) p.coeffs.back() = -7;
    }
    RelationLattice R = relation_lattice(fam);
    Mat A = coeff_matrix(fam);
    RatKernel oracle = rational_left_kernel(A);

    // dimensions agree with the rational rank
    REQUIRE(R.rank() == f - oracle.rank);

    // every scaled oracle row lies in the computed lattice
    for (auto& v : oracle.scaled_basis) REQUIRE(lattice_contains(R.basis, v));

    // computed lattice is saturated: its basis has trivial invariant factors
    if (!R.basis.empty()) {
      SnfResult s = smith_normal_form(R.basis);
      for (auto& di : s.d) REQUIRE(di == 1);
    }

    // ...and annihilates the coefficient matrix exactly
    for (auto& m : R.basis) {
      size_t cols = A[0].size();
      for (size_t j = 0; j < cols; ++j) {
        BigInt sum = 0;
        for (size_t i = 0; i < f; ++i) sum += m[i] * A[i][j];
        REQUIRE(sum == 0);
      }
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "multicheb/errors.hpp"
#include "multicheb/poly.hpp"

using namespace multicheb;

namespace {

Polynomial random_poly(std::mt19937& rng, int d, int deg, int terms) {
  std::uniform_int_distribution<int> e(0, deg);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Polynomial p(d);
  for (int i = 0; i < terms; ++i) {
    MultiIndex k(d);
    int left = deg;
    for (int j = 0; j < d; ++j) {
      k[j] = std::uniform_int_distribution<int>(0, left)(rng);
      left -= k[j];
    }
    p.add_term(k, c(rng));
  }
  (void)e;
  return p;
}

Eigen::VectorXd random_point(std::mt19937& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("graded lex order of the low monomials") {
  auto mons = monomials_up_to(2, 1);
  REQUIRE(mons.size() == 3);
  CHECK(mons[0] == MultiIndex{0, 0});
  CHECK(mons[1] == MultiIndex{0, 1});
  CHECK(mons[2] == MultiIndex{1, 0});
  CHECK(monomials_up_to(3, 7).size() == 120);
  CHECK(monomials_up_to(3, 9).size() == binomial(12, 3));
  CHECK_THROWS_AS(monomials_up_to(0, 2), InvalidInput);
  CHECK_THROWS_AS(monomials_up_to(2, -1), InvalidInput);
}

TEST_CASE("monomial counts match binomials") {
  for (int d = 1; d <= 4; ++d)
    for (int t = 0; t <= 6; ++t) CHECK(monomials_up_to(d, t).size() == binomial(t + d, d));
}

TEST_CASE("order is strictly increasing and degree-first") {
  auto mons = monomials_up_to(3, 5);
  for (std::size_t i = 1; i < mons.size(); ++i) {
    CHECK(mons[i - 1] < mons[i]);
    CHECK(mons[i - 1].degree() <= mons[i].degree());
  }
}

TEST_CASE("basis index and evaluation") {
  MonomialBasis basis(2, 3);
  CHECK(basis.index_of(MultiIndex{1, 2}) >= 0);
  CHECK(basis.index_of(MultiIndex{4, 0}) == -1);
  CHECK(basis.count_up_to(1) == 3);
  double x[2] = {0.5, -2.0};
  Eigen::VectorXd v = basis.evaluate(x);
  CHECK(v[basis.index_of(MultiIndex{1, 2})] == doctest::Approx(2.0));
}

TEST_CASE("polynomial arithmetic is consistent with evaluation") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    Polynomial p = random_poly(rng, d, 4, 6);
    Polynomial q = random_poly(rng, d, 3, 5);
    Eigen::VectorXd x = random_point(rng, d);
    CHECK((p + q).evaluate(x) == doctest::Approx(p.evaluate(x) + q.evaluate(x)).epsilon(1e-12));
    CHECK((p - q).evaluate(x) == doctest::Approx(p.evaluate(x) - q.evaluate(x)).epsilon(1e-12));
    CHECK((p * q).evaluate(x) == doctest::Approx(p.evaluate(x) * q.evaluate(x)).epsilon(1e-11));
    CHECK((p - p).is_zero());
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial p = random_poly(rng, 3, 4, 8);
    Eigen::VectorXd x = random_point(rng, 3);
    Eigen::VectorXd g = p.gradient(x);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      CHECK(g[i] == doctest::Approx((p.evaluate(a) - p.evaluate(b)) / 2e-6).epsilon(1e-6));
    }
  }
}

TEST_CASE("to_string and parse round trip") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial p = random_poly(rng, 3, 5, 7);
    Polynomial q = Polynomial::parse(p.to_string(), 3);
    CHECK((p - q).is_zero());
  }
  CHECK(Polynomial(2).to_string() == "0");
  Polynomial r = Polynomial::parse("2 * x1 x2^3 + -1.5", 2);
  CHECK(r.coefficient(MultiIndex{1, 3}) == 2.0);
  CHECK(r.coefficient(MultiIndex{0, 0}) == -1.5);
}

TEST_CASE("evaluate rejects wrong dimension") {
  Polynomial p = Polynomial::variable(3, 0);
  Eigen::VectorXd x(2);
  x << 1, 2;
  CHECK_THROWS_AS(p.evaluate(x), DimensionMismatch);
}

TEST_CASE("Chebyshev polynomials") {
  auto T3 = chebyshev_T(3);
  CHECK(T3 == UnivariatePolynomial({0.0, -3.0, 0.0, 4.0}));
  for (int n = 0; n <= 8; ++n) {
    auto T = chebyshev_T(n);
    for (double th : {0.1, 0.7, 1.3, 2.9}) {
      CHECK(T(std::cos(th)) == doctest::Approx(std::cos(n * th)).epsilon(1e-12));
      if (n >= 1) {
        auto U = chebyshev_U(n - 1);
        CHECK(U(std::cos(th)) == doctest::Approx(std::sin(n * th) / std::sin(th)).epsilon(1e-10));
      }
    }
  }
  CHECK(chebyshev_U(-1).is_zero());
}

TEST_CASE("tensor product and composition") {
  std::vector<UnivariatePolynomial> f{chebyshev_T(2), chebyshev_T(1)};
  Polynomial p = tensor_product(f);
  Eigen::VectorXd x(2);
  x << 0.3, -0.4;
  CHECK(p.evaluate(x) == doctest::Approx(chebyshev_T(2)(0.3) * (-0.4)));
  Polynomial lin = Polynomial::variable(2, 0) * 2.0 - Polynomial::constant(2, 1.0);
  Polynomial c = compose(chebyshev_T(3), lin);
  CHECK(c.evaluate(x) == doctest::Approx(chebyshev_T(3)(2 * 0.3 - 1)));
}

TEST_CASE("real roots of a quartic") {
  UnivariatePolynomial q({243.0, -1944.0, 4880.0, -5472.0, 2880.0});
  auto roots = real_roots(q, 0.0, 0.25);
  REQUIRE(!roots.empty());
  CHECK(roots.front() == doctest::Approx(0.21998).epsilon(1e-4));
  // Double root detection.
  UnivariatePolynomial sq({0.25, -1.0, 1.0});  // (x - 1/2)^2
  auto r2 = real_roots(sq, 0.0, 1.0);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("embed moves variables") {
  Polynomial p = Polynomial::monomial(MultiIndex{2, 1});
  std::vector<int> pos{0, 2};
  Polynomial e = p.embed(3, pos);
  CHECK(e.coefficient(MultiIndex{2, 0, 1}) == 1.0);
}

#include <doctest.h>

#include <cmath>
#include <functional>

#include "multicheb/closedform.hpp"
#include "multicheb/domains.hpp"
#include "multicheb/errors.hpp"

using namespace multicheb;

namespace {

// Golden-section maximum of a unimodal function after a coarse scan.
double maximize_1d(const std::function<double(double)>& f, double lo, double hi) {
  const int n = 20000;
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (f(lo + (hi - lo) * i / n) > f(lo + (hi - lo) * best / n)) best = i;
  double a = lo + (hi - lo) * std::max(0, best - 1) / n;
  double b = lo + (hi - lo) * std::min(n, best + 1) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) > f(d))
      b = d;
    else
      a = c;
  }
  return f(0.5 * (a + b));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

}  // namespace

TEST_CASE("ball (2,2,1) constant from an independent 1-D maximization") {
  auto c = ball_221_constant();
  const double oracle =
      maximize_1d([](double t) { return (1 + t) * (1 + t) * (1 - t) * t / (4 * (1 + 4 * t + 4 * t * t)); }, 0, 1);
  CHECK(std::abs(c.a - oracle) < 1e-12);
  CHECK(std::abs(c.a - 3.63000825e-2) < 1e-8);
  CHECK(c.tau > 0.0);
  CHECK(c.tau < 1.0);
}

TEST_CASE("ball (2,2,1) polynomial") {
  const double a = ball_221_constant().a;
  auto P = ball_221_polynomial();
  CHECK(P.evaluate(vec({0.0, 0.0, 1.0})) == doctest::Approx(a).epsilon(1e-14));
  CHECK(P.coefficient(MultiIndex{2, 2, 1}) == 1.0);
  CHECK(P.coefficient(MultiIndex{0, 0, 3}) == doctest::Approx(4 * a));
  CHECK(P.coefficient(MultiIndex{0, 0, 1}) == doctest::Approx(-3 * a));
  CHECK(oracle_uniform_norm(P, make_ball(3)) == doctest::Approx(a).epsilon(1e-5));
  // Sign pattern on the signature.
  auto sig = ball_221_signature();
  for (std::size_t j = 0; j < sig.points.size(); ++j) {
    CHECK(sig.points[j].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sig.signs[j] * P.evaluate(sig.points[j]) == doctest::Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("ball (3,1,1) value") {
  const double v = ball_311_value();
  CHECK(std::abs(v - 4.016e-2) < 5e-5);
}

TEST_CASE("simplex (2,1,1) constants") {
  auto c = simplex_211_constants();
  CHECK(std::abs(c.tau - 0.21998) < 1e-5);
  const double q = 2880 * std::pow(c.tau, 4) - 5472 * std::pow(c.tau, 3) + 4880 * c.tau * c.tau - 1944 * c.tau + 243;
  CHECK(std::abs(q) < 1e-9);
  CHECK(c.c == doctest::Approx(-3.0 / c.tau));
  CHECK(std::abs(c.E - c.tau * c.tau / 18.0) < 1e-15);
  CHECK(std::abs(c.E - 1.0 / (2.0 * c.c * c.c)) < 1e-15);
  CHECK(std::abs(c.E - 2.68850e-3) < 1e-7);
  CHECK(std::abs(c.sigma - 0.41942) < 2e-5);
  const double tau = c.tau;
  const double mx = maximize_1d([&](double y) { return y * (1 - 2 * y) * (y - tau) * (y - tau); }, 0.0, 0.5);
  CHECK(std::abs(mx - tau * tau / 18.0) < 1e-10);
}

TEST_CASE("simplex (2,1,1) polynomial") {
  auto c = simplex_211_constants();
  auto P = simplex_211_polynomial();
  const double y = 0.3;
  const double t3 = 4 * std::pow(2 * y - 1, 3) - 3 * (2 * y - 1);
  CHECK(P.evaluate(vec({1 - y, y, 0.0})) == doctest::Approx(-c.E * t3).epsilon(1e-12));
  CHECK(P.evaluate(vec({1 - y, 0.0, y})) == doctest::Approx(-c.E * t3).epsilon(1e-12));
  CHECK(oracle_uniform_norm(P, make_simplex(3)) == doctest::Approx(c.E).epsilon(1e-5));
  auto sig = simplex_211_signature();
  for (std::size_t j = 0; j < sig.points.size(); ++j) {
    CHECK(contains(make_simplex(3), sig.points[j], 1e-12));
    CHECK(sig.signs[j] * P.evaluate(sig.points[j]) == doctest::Approx(c.E).epsilon(1e-8));
  }
}

TEST_CASE("hypercube best approximants") {
  CHECK((Polynomial::monomial(MultiIndex{2, 2}) - hypercube_best_approximant(MultiIndex{2, 2})).to_string() ==
        (0.25 * tensor_product(std::vector<UnivariatePolynomial>{chebyshev_T(2), chebyshev_T(2)})).to_string());
  for (auto k : {MultiIndex{1, 1}, MultiIndex{3, 1}, MultiIndex{2, 2}, MultiIndex{2, 1, 1}, MultiIndex{3, 2, 1}}) {
    CAPTURE(k.to_string());
    const int n = k.degree(), d = static_cast<int>(k.size());
    auto p = hypercube_best_approximant(k);
    CHECK(p.degree() <= n - 1);
    CHECK(oracle_uniform_norm(Polynomial::monomial(k) - p, make_hypercube(d)) ==
          doctest::Approx(std::ldexp(1.0, d - n)).epsilon(1e-8));
  }
}

TEST_CASE("2-D ball and simplex best approximants") {
  for (int n = 2; n <= 5; ++n) {
    for (int k2 = 1; k2 <= n / 2; ++k2) {
      MultiIndex k{n - k2, k2};
      CAPTURE(k.to_string());
      auto pb = ball2d_best_approximant(k);
      CHECK(pb.degree() <= n - 1);
      CHECK(oracle_uniform_norm(Polynomial::monomial(k) - pb, make_ball(2)) ==
            doctest::Approx(std::ldexp(1.0, 1 - n)).epsilon(1e-5));
      auto ps = simplex2d_best_approximant(k);
      CHECK(ps.degree() <= n - 1);
      CHECK(oracle_uniform_norm(Polynomial::monomial(k) - ps, make_simplex(2)) ==
            doctest::Approx(std::ldexp(1.0, 1 - 2 * n)).epsilon(1e-5));
    }
  }
}

TEST_CASE("known_error lookups") {
  SUBCASE("hypercube") {
    auto r = known_error(MultiIndex{3, 2, 1}, "hypercube");
    REQUIRE(r);
    CHECK(r->value == std::ldexp(1.0, -3));
  }
  SUBCASE("zero exponents are dropped") {
    auto r = known_error(MultiIndex{0, 2, 0, 1}, "ball");
    REQUIRE(r);
    CHECK(r->k == MultiIndex{2, 1});
    CHECK(r->value == 0.25);
  }
  SUBCASE("one variable") {
    CHECK(known_error(MultiIndex{0, 4}, "cross")->value == 0.125);
    CHECK(known_error(MultiIndex{3}, "simplex")->value == std::ldexp(1.0, -5));
  }
  SUBCASE("special 3-D cases") {
    CHECK(known_error(MultiIndex{1, 1, 1}, "ball")->value == doctest::Approx(0.19245008973));
    CHECK(known_error(MultiIndex{1, 2, 1}, "ball")->value == doctest::Approx(8.5786e-2).epsilon(1e-4));
    CHECK(known_error(MultiIndex{1, 1, 1}, "simplex")->value == 1.0 / 72.0);
    CHECK(known_error(MultiIndex{4, 4, 4}, "ball")->value == doctest::Approx(6.2654e-5).epsilon(1e-4));
    CHECK(known_error(MultiIndex{2, 2, 2}, "simplex")->value == known_error(MultiIndex{4, 4, 4}, "ball")->value);
  }
  SUBCASE("unknown") {
    CHECK_FALSE(known_error(MultiIndex{3, 2, 1}, "ball"));
    CHECK_FALSE(known_error(MultiIndex{1, 1, 1}, "cross"));
  }
  SUBCASE("invalid") {
    CHECK_THROWS_AS(known_error(MultiIndex{0, 0}, "ball"), InvalidInput);
    CHECK_THROWS_AS(known_error(MultiIndex{1, 1}, "torus"), InvalidInput);
  }
}

TEST_CASE("oracle uniform norm") {
  CHECK(oracle_uniform_norm(compose(chebyshev_T(3), Polynomial::variable(1, 0)), make_hypercube(1)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(oracle_uniform_norm(Polynomial::monomial(MultiIndex{1, 1, 1}), make_ball(3)) ==
        doctest::Approx(std::pow(3.0, -1.5)).epsilon(1e-6));
  CHECK(oracle_uniform_norm(Polynomial::monomial(MultiIndex{1, 1, 1}), make_simplex(3)) ==
        doctest::Approx(1.0 / 27.0).epsilon(1e-6));
  CHECK_THROWS_AS(oracle_uniform_norm(Polynomial::monomial(MultiIndex{1, 1}), make_ball(3)), DimensionMismatch);
}

#include <doctest.h>

#include <random>

#include "multicheb/domains.hpp"
#include "multicheb/errors.hpp"

using namespace multicheb;

TEST_CASE("builtin generator counts and half degrees") {
  CHECK(make_ball(3).generators.size() == 1);
  CHECK(make_ball(3).max_half_degree() == 1);
  CHECK(make_hypercube(3).generators.size() == 3);
  CHECK(make_simplex(3).generators.size() == 4);
  CHECK(make_simplex(3).max_half_degree() == 1);
  CHECK(make_simplex(3, true).generators.size() == 5);
  CHECK(make_cross_polytope(3).generators.size() == 8);
  CHECK_THROWS_AS(make_cross_polytope(21), InvalidInput);
  CHECK_THROWS_AS(make_ball(0), InvalidInput);
}

TEST_CASE("membership") {
  Eigen::Vector3d in(0.2, 0.2, 0.2), out(0.9, 0.9, 0.0);
  CHECK(contains(make_ball(3), in));
  CHECK(!contains(make_ball(3), out));
  CHECK(contains(make_hypercube(3), out));
  CHECK(contains(make_simplex(3), in));
  CHECK(!contains(make_simplex(3), Eigen::Vector3d(-0.1, 0.5, 0.1)));
  CHECK(!contains(make_cross_polytope(3), out));
  CHECK_THROWS_AS(contains(make_ball(3), Eigen::Vector2d(0, 0)), DimensionMismatch);
}

TEST_CASE("projection lands in the domain and fixes interior points") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto kind : {DomainKind::ball, DomainKind::hypercube, DomainKind::simplex, DomainKind::cross_polytope}) {
    auto dom = make_builtin(kind, 3);
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd x(3);
      for (int j = 0; j < 3; ++j) x[j] = u(rng);
      Eigen::VectorXd p = project(dom, x);
      CHECK(contains(dom, p, 1e-12));
      CHECK((project(dom, p) - p).norm() < 1e-12);
    }
  }
}

TEST_CASE("zero exponent reduction") {
  auto r = reduce_zero_exponents(MultiIndex{2, 0, 1}, make_ball(3));
  CHECK(r.changed);
  CHECK(r.witness.reduced == MultiIndex{2, 1});
  CHECK(r.domain.dim == 2);
  CHECK(r.witness.kept == std::vector<int>{0, 2});
  auto same = reduce_zero_exponents(MultiIndex{1, 1, 1}, make_simplex(3));
  CHECK(!same.changed);
  CHECK_THROWS_AS(reduce_zero_exponents(MultiIndex{0, 0, 0}, make_ball(3)), InvalidInput);
}

TEST_CASE("canonical exponents") {
  CHECK(canonicalize_exponent(MultiIndex{1, 3, 2}) == MultiIndex{3, 2, 1});
  auto six = canonical_exponents(3, 6);
  REQUIRE(six.size() == 3);
  CHECK(six[0] == MultiIndex{4, 1, 1});
  CHECK(six[1] == MultiIndex{3, 2, 1});
  CHECK(six[2] == MultiIndex{2, 2, 2});
  std::size_t total = 0;
  for (int n = 3; n <= 6; ++n) total += canonical_exponents(3, n).size();
  CHECK(total == 7);
}

TEST_CASE("grid samples stay inside and reach the boundary") {
  for (auto kind : {DomainKind::ball, DomainKind::hypercube, DomainKind::simplex, DomainKind::cross_polytope}) {
    auto dom = make_builtin(kind, 3);
    auto pts = grid_sample(dom, 9);
    CHECK(!pts.empty());
    double best = 0.0;
    for (const auto& p : pts) {
      CHECK(contains(dom, p, 1e-12));
      double g = 1e9;
      for (const auto& gen : dom.generators) g = std::min(g, gen.evaluate(p));
      best = std::max(best, -g);
      if (g < 1e-12) best = 1.0;
    }
    CHECK(best == 1.0);
  }
  CHECK_THROWS_AS(grid_sample(make_ball(2), 1), InvalidInput);
}

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "multicheb/errors.hpp"
#include "multicheb/sdp.hpp"

using namespace multicheb::sdp;
using multicheb::InvalidInput;

namespace {

// min c s.t. X - c = 0, X psd (1x1).
SdpProblem nonneg_scalar() {
  SdpProblem p;
  p.add_block(1);
  p.add_free();
  LinearForm row;
  row.add_matrix(0, 0, 0, 1.0);
  row.add_free(0, -1.0);
  p.add_row(row, 0.0);
  p.cost.add_free(0, 1.0);
  return p;
}

// max / min y2 s.t. [[1,y1],[y1,y2]] psd, y1 + y2 = 1.
SdpProblem golden(Sense sense) {
  SdpProblem p;
  p.side = Side::dual;
  p.sense = sense;
  p.add_block(2);
  p.add_free();
  p.cost.add_matrix(0, 0, 0, 1.0);
  p.cost.add_free(0, 1.0);
  LinearForm y1, y2;
  y1.add_matrix(0, 0, 1, -1.0);
  y1.add_free(0, 1.0);
  y2.add_matrix(0, 1, 1, -1.0);
  y2.add_free(0, 1.0);
  p.add_row(y1, 0.0);
  p.add_row(y2, 1.0);
  return p;
}

Eigen::MatrixXd random_spd(std::mt19937& rng, int s) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd G(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) G(i, j) = n(rng);
  return G * G.transpose() + 0.5 * Eigen::MatrixXd::Identity(s, s);
}

// Strictly feasible on both sides by construction.
SdpProblem random_problem(std::mt19937& rng, int nfree) {
  std::normal_distribution<double> n(0.0, 1.0);
  SdpProblem p;
  std::vector<int> sizes{3, 2, 4};
  for (int s : sizes) p.add_block(s);
  p.add_free(nfree);
  const int m = 6;
  std::vector<Eigen::MatrixXd> X0, S0;
  for (int s : sizes) {
    X0.push_back(random_spd(rng, s));
    S0.push_back(random_spd(rng, s));
  }
  Eigen::VectorXd x0(nfree), y0(m);
  for (int j = 0; j < nfree; ++j) x0[j] = n(rng);
  for (int i = 0; i < m; ++i) y0[i] = n(rng);
  std::vector<Eigen::MatrixXd> C = S0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nfree);
  for (int i = 0; i < m; ++i) {
    LinearForm f;
    double rhs = 0.0;
    for (int b = 0; b < static_cast<int>(sizes.size()); ++b) {
      for (int r = 0; r < sizes[b]; ++r) {
        for (int cc = r; cc < sizes[b]; ++cc) {
          if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5) continue;
          double v = n(rng);
          f.add_matrix(b, r, cc, v);
          rhs += (r == cc ? 1.0 : 2.0) * v * X0[b](r, cc);
          C[b](r, cc) += y0[i] * v;
          if (r != cc) C[b](cc, r) += y0[i] * v;
        }
      }
    }
    for (int j = 0; j < nfree; ++j) {
      double v = n(rng);
      f.add_free(j, v);
      rhs += v * x0[j];
      c[j] += v * y0[i];
    }
    p.add_row(f, rhs);
  }
  for (int b = 0; b < static_cast<int>(sizes.size()); ++b)
    for (int r = 0; r < sizes[b]; ++r)
      for (int cc = r; cc < sizes[b]; ++cc) p.cost.add_matrix(b, r, cc, C[b](r, cc));
  for (int j = 0; j < nfree; ++j) p.cost.add_free(j, c[j]);
  return p;
}

SdpProblem scaled_cost(SdpProblem p, double lambda) {
  for (auto& e : p.cost.matrix_terms) e.value *= lambda;
  for (auto& f : p.cost.free_terms) f.second *= lambda;
  return p;
}

}  // namespace

TEST_CASE("minimize c subject to c >= 0") {
  auto sol = solve(nonneg_scalar());
  CHECK(sol.status == Status::optimal);
  CHECK(std::abs(sol.x[0]) < 1e-7);
  CHECK(std::abs(sol.objective) < 1e-7);
}

TEST_CASE("2x2 moment toy against hand KKT") {
  // Boundary y2 = y1^2 with y1 + y2 = 1.
  auto mx = solve(golden(Sense::maximize));
  REQUIRE(mx.status == Status::optimal);
  CHECK(mx.y[0] == doctest::Approx(-(1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-6));
  CHECK(mx.objective == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-7));

  auto mn = solve(golden(Sense::minimize));
  REQUIRE(mn.status == Status::optimal);
  CHECK(mn.y[0] == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-6));
  CHECK(mn.objective == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-7));
}

TEST_CASE("infeasible and unbounded problems are detected") {
  SdpProblem inf;
  inf.add_block(1);
  LinearForm r;
  r.add_matrix(0, 0, 0, 1.0);
  inf.add_row(r, -1.0);
  CHECK(solve(inf).status == Status::infeasible);
  auto res = residuals(inf, solve(inf));
  CHECK(std::isnan(res.gap));

  SdpProblem unb;
  unb.add_block(1);
  unb.add_free();
  LinearForm u;
  u.add_matrix(0, 0, 0, 1.0);
  u.add_free(0, 1.0);
  unb.add_row(u, 0.0);
  unb.cost.add_free(0, 1.0);
  CHECK(solve(unb).status == Status::unbounded);

  // The same programs seen from the other side swap roles.
  SdpProblem dinf = golden(Sense::maximize);
  dinf.num_free = 0;  // without y1 + y2 = 1, y2 grows without bound
  dinf.cost.free_terms.clear();
  for (auto& row : dinf.rows) row.free_terms.clear();
  CHECK(solve(dinf).status == Status::unbounded);
}

TEST_CASE("validation") {
  SdpProblem empty;
  CHECK_THROWS_AS(solve(empty), InvalidInput);
  SdpProblem bad;
  bad.add_block(2);
  LinearForm r;
  r.add_matrix(0, 2, 0, 1.0);
  bad.add_row(r, 1.0);
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  SdpProblem bad2;
  bad2.add_block(0);
  CHECK_THROWS_AS(bad2.validate(), InvalidInput);
}

TEST_CASE("residuals of hand-built solutions") {
  SdpProblem p = nonneg_scalar();
  SdpSolution s;
  s.status = Status::optimal;
  s.X = {Eigen::MatrixXd::Constant(1, 1, 2.0)};
  s.x = Eigen::VectorXd::Constant(1, 2.0);
  s.y = Eigen::VectorXd::Constant(1, -1.0);
  s.S = dual_slack(p, s.y);
  auto r = residuals(p, s);
  CHECK(r.primal_equality <= 1e-12);
  CHECK(r.dual_equality <= 1e-12);
  CHECK(r.gap == doctest::Approx(2.0));
  s.X[0](0, 0) += 1e-3;
  CHECK(residuals(p, s).primal_equality == doctest::Approx(1e-3));
}

TEST_CASE("random strictly feasible problems") {
  std::mt19937 rng(2024);
  SolverOptions tight;
  tight.eps_feas = tight.eps_gap = 1e-10;
  for (int trial = 0; trial < 12; ++trial) {
    SdpProblem p = random_problem(rng, trial % 3);
    auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.metrics.primal_residual <= 1e-8);
    CHECK(sol.metrics.dual_residual <= 1e-8);
    CHECK(sol.metrics.gap <= 1e-8);
    auto r = residuals(p, sol);
    for (double e : r.primal_min_eigenvalue) CHECK(e >= -1e-8);
    for (double e : r.dual_min_eigenvalue) CHECK(e >= -1e-8);
    // weak duality within the gap
    CHECK(r.primal_objective - r.dual_objective >= -1e-6 * (1 + std::abs(r.primal_objective)));

    // scaling invariance
    auto base = solve(p, tight);
    auto scaled = solve(scaled_cost(p, 3.5), tight);
    CHECK(scaled.status == base.status);
    CHECK(scaled.objective == doctest::Approx(3.5 * base.objective).epsilon(1e-9));

    // determinism
    auto again = solve(p);
    CHECK(again.metrics.iterations == sol.metrics.iterations);
    CHECK(again.objective == sol.objective);

    // maximizing the negated cost is the same program
    SdpProblem neg = scaled_cost(p, -1.0);
    neg.sense = Sense::maximize;
    auto ns = solve(neg, tight);
    CHECK(ns.objective == doctest::Approx(-base.objective).epsilon(1e-9));
  }
}

TEST_CASE("SDPA toy export") {
  SdpProblem p;
  p.add_block(1);
  LinearForm r;
  r.add_matrix(0, 0, 0, 1.0);
  p.add_row(r, 1.0);
  std::string text = export_sdpa(p);
  CHECK(text == "1\n1\n1\n-1\n1 1 1 1 -1\n");
  CHECK(export_sdpa(p) == text);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("SDPA round trip reproduces data and optimum") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 4; ++trial) {
    SdpProblem p = random_problem(rng, trial % 3);
    if (trial == 3) p.sense = Sense::maximize, p.cost = scaled_cost(p, -1.0).cost;
    std::string text = export_sdpa(p);
    SdpProblem q = parse_sdpa(text);
    CHECK(q.num_free == p.num_free);
    CHECK(export_sdpa(q) == text);
    SolverOptions tight;
    tight.eps_feas = tight.eps_gap = 1e-10;
    auto a = solve(p, tight);
    auto b = solve(q, tight);
    REQUIRE(a.status == Status::optimal);
    REQUIRE(b.status == Status::optimal);
    // The SDPA side is always "max rhs.y" of the normalized pair.
    double expect = p.sense == Sense::minimize ? a.objective : -a.objective;
    CHECK(b.objective == doctest::Approx(expect).epsilon(1e-9));
  }
  auto g = golden(Sense::maximize);
  auto gq = parse_sdpa(export_sdpa(g));
  CHECK(solve(gq).objective == doctest::Approx(solve(g).objective).epsilon(1e-9));
}

TEST_CASE("SDPA parser tolerates punctuation and comments") {
  std::string text = "\"a comment\n* another\n1 =m\n2\n{1, 1}\n{-1}\n0 1 1 1 -1\n1 1 1 1 -1\n1 2 1 1 1\n";
  // "=m" is not a number
  CHECK_THROWS_AS(parse_sdpa(text), InvalidInput);
  text = "\"a comment\n1\n2\n{1, 1}\n{-1}\n0 1 1 1 -1\n1 1 1 1 -1\n1 2 1 1 1\n";
  SdpProblem p = parse_sdpa(text);
  CHECK(p.num_blocks() == 2);
  CHECK(p.num_free == 0);
  CHECK_THROWS_AS(parse_sdpa("1\n1\n2\n1\n1 1 3 1 1\n"), InvalidInput);
}

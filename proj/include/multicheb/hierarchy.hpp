#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multicheb/domains.hpp"
#include "multicheb/poly.hpp"
#include "multicheb/sdp.hpp"

namespace multicheb {

/// Moments y_l indexed by exponent.
using MomentMap = std::map<MultiIndex, double>;

/// Hank_t(y): rows and columns follow monomials_up_to(d, t).
Eigen::MatrixXd moment_matrix(const MomentMap& y, int t, int d);
/// Hank_s(G y) with (G y)_l = sum_l' g_l' y_{l + l'}.
Eigen::MatrixXd localizing_matrix(const MomentMap& y, const Polynomial& g, int s);

/// Moments up to total degree `order` of sum_j w_j delta_{x_j}.
MomentMap measure_moments(const std::vector<Eigen::VectorXd>& atoms,
                          const std::vector<double>& weights, int order);

/// Affine coordinates x = center + scale * u in which a level is solved.
/// The error of best approximation does not depend on the chart, but the
/// conditioning of the moment matrices does.
struct Chart {
  Eigen::VectorXd center;  ///< empty: origin
  double scale = 1.0;

  bool is_identity() const { return center.isZero() && scale == 1.0; }
  Eigen::VectorXd to_domain(const Eigen::VectorXd& u) const;
};

/// Identity for domains centred at the origin; for the simplex, the
/// centroid with scale d.
Chart default_chart(const SemialgebraicDomain& domain);
/// The domain in chart coordinates (generators g(center + scale * u)).
SemialgebraicDomain pull_back(const SemialgebraicDomain& domain, const Chart& chart);
/// p(x) -> p(center + scale * u) and back.
Polynomial to_chart(const Polynomial& p, const Chart& chart);
Polynomial from_chart(const Polynomial& p, const Chart& chart);
/// Moments in domain coordinates from moments in chart coordinates.
MomentMap push_forward(const MomentMap& y, const Chart& chart, int order);

/// Pseudo-moments of the two measures of the moment relaxation, in the
/// coordinates of `chart`.
struct MomentVector {
  int dim = 0;
  int order = 0;  ///< 2t
  MomentMap plus;
  MomentMap minus;
  Chart chart;
};

/// Smallest level allowed without force_level: deg f + max n'_h.
int level_threshold(const Polynomial& f, const SemialgebraicDomain& domain);

struct RelaxationOptions {
  bool force_level = false;
};

/// max sum_l f_l (y+_l - y-_l)  s.t.  y+_l = y-_l (|l| <= n-1),
/// y+_0 + y-_0 = 1, Hank_t(y+-) psd, Hank_{t-n'_h}(G_h y+-) psd.
/// Block order: moment(+), localizing(+) per generator, moment(-),
/// localizing(-) per generator.
sdp::SdpProblem assemble_moment_relaxation(const Polynomial& f, int n,
                                           const SemialgebraicDomain& domain, int t,
                                           const RelaxationOptions& opts = {});

/// min c over c and p in P_{n-1} with c - (f - p) and c + (f - p) in the
/// truncated quadratic module of degree 2t. Same data as the moment
/// relaxation, read from the primal side; free scalars are the coefficients
/// of p (monomials_up_to(d, n-1) order) followed by c.
sdp::SdpProblem assemble_sos_relaxation(const Polynomial& f, int n,
                                        const SemialgebraicDomain& domain, int t,
                                        const RelaxationOptions& opts = {});

/// Reads p* off the free scalars of a solved SOS relaxation.
Polynomial recover_best_approximant(const sdp::SdpSolution& sos, const Polynomial& f, int n);

/// Reads y+- off the multipliers of a solved relaxation of level t.
MomentVector recover_moments(const sdp::SdpSolution& solution, int d, int t);

struct ExtractionOptions {
  double rank_tol = 1e-6;
  unsigned seed = 12345;
};

struct LevelRecord {
  int t = 0;
  double ub = 0.0;        ///< SOS value
  double ub_prime = 0.0;  ///< moment value
  sdp::Status sos_status = sdp::Status::stalled;
  sdp::Status moment_status = sdp::Status::stalled;
  sdp::SolverMetrics metrics;
  bool certified = false;
  /// Numerical ranks of Hank_s(y+) and Hank_s(y-) for s = 0..t.
  std::vector<int> ranks_plus;
  std::vector<int> ranks_minus;
  /// Order s at which each measure was found flat, -1 if not.
  int flat_order_plus = -1;
  int flat_order_minus = -1;
  double seconds = 0.0;
};

struct LevelResult {
  LevelRecord record;
  MomentVector moments;
  Polynomial approximant;
  sdp::SdpSolution solution;
};

struct HierarchyOptions {
  int t_min = 0;  ///< 0: level_threshold
  int t_max = 0;  ///< 0: t_min + 3
  int max_block_side = 200;
  bool stop_when_certified = true;
  /// Solve in default_chart(domain) coordinates.
  bool use_chart = true;
  RelaxationOptions relaxation;
  sdp::SolverOptions solver;
  ExtractionOptions extraction;
  std::function<void(const std::string&)> log;
};

/// One level: a single primal-dual solve gives both ub_t and ub'_t. The
/// approximant is returned in domain coordinates, the moments in chart
/// coordinates.
LevelResult run_level(const Polynomial& f, int n, const SemialgebraicDomain& domain, int t,
                      const HierarchyOptions& opts = {});

struct HierarchyReport {
  std::vector<LevelRecord> levels;
  double E_est = 0.0;
  bool has_value = false;
  bool certified = false;
  int certified_level = -1;
  /// Moments and approximant of the certified level, or of the last
  /// successful one when nothing was certified.
  std::optional<MomentVector> certificate;
  std::optional<Polynomial> approximant;
};

HierarchyReport run_hierarchy(const Polynomial& f, int n, const SemialgebraicDomain& domain,
                              const HierarchyOptions& opts = {});

}  // namespace multicheb

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace multicheb::sdp {

/// One coefficient of a symmetric block matrix; (row, col) and (col, row)
/// both carry `value`. Indices are 0-based; row <= col is conventional but
/// either triangle is accepted.
struct MatrixEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Linear functional over the block matrices and the free scalars.
struct LinearForm {
  std::vector<MatrixEntry> matrix_terms;
  std::vector<std::pair<int, double>> free_terms;

  void add_matrix(int block, int row, int col, double value) {
    matrix_terms.push_back({block, row, col, value});
  }
  void add_free(int index, double value) { free_terms.emplace_back(index, value); }
};

enum class Sense { minimize, maximize };

/// Which side of the conic pair the modelled program lives on.
enum class Side { primal, dual };

/// Block-diagonal semidefinite program stored as a conic pair
///
///   (P)  min  <C, X> + c.x        s.t.  <A_i, X> + b_i.x = rhs_i,  X psd
///   (D)  max  rhs.y               s.t.  S = C - sum_i y_i A_i psd,
///                                       sum_i y_i b_i = c
///
/// X ranges over the PSD blocks and x over the free scalars. `cost` holds
/// (C, c) and `rows[i]` holds (A_i, b_i).
///
/// With side == primal the model is (P): matrix blocks plus free scalars,
/// tied by the equalities. With side == dual the model is (D): the free
/// scalars are y, one per row, and each block S_b is tied to them by
/// S_b = C_b - sum_i y_i A_ib; the linear equalities on y are the columns
/// of b. `sense` is the optimisation direction of the modelled objective
/// (<C,X> + c.x for primal, rhs.y for dual); the solver flips signs as
/// needed and always works on a min/max pair internally.
struct SdpProblem {
  std::vector<int> block_sizes;
  int num_free = 0;
  LinearForm cost;
  std::vector<LinearForm> rows;
  std::vector<double> rhs;
  Sense sense = Sense::minimize;
  Side side = Side::primal;

  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_blocks() const { return static_cast<int>(block_sizes.size()); }
  int add_block(int size);
  int add_free(int count = 1);
  int add_row(LinearForm form, double value);

  /// Throws InvalidInput on out-of-range indices or empty problems.
  void validate() const;
};

enum class Status { optimal, near_optimal, infeasible, unbounded, stalled };
std::string to_string(Status s);

struct SolverOptions {
  double eps_feas = 1e-8;
  double eps_gap = 1e-8;
  int max_iter = 120;
  /// Factor applied to the tolerances for `near_optimal`.
  double near_optimal_factor = 1e3;
  bool verbose = false;
};

struct SolverMetrics {
  /// ||rhs - A(X) - B x|| / (1 + ||rhs||).
  double primal_residual = 0.0;
  /// ||C - A*(y) - S, c - B^T y|| / (1 + ||C, c||).
  double dual_residual = 0.0;
  /// |pobj - dobj| / (1 + |pobj| + |dobj|).
  double gap = 0.0;
  int iterations = 0;
};

struct SdpSolution {
  Status status = Status::stalled;
  std::vector<Eigen::MatrixXd> X;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> S;
  /// <C,X> + c.x and rhs.y for the problem's own data.
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// Value of the modelled objective (primal or dual side).
  double objective = 0.0;
  SolverMetrics metrics;
};

/// Primal-dual interior point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start). Deterministic for fixed input.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts = {});

/// Absolute residuals recomputed from scratch.
struct Residuals {
  double primal_equality = 0.0;  ///< max_i |<A_i,X> + b_i.x - rhs_i|
  double dual_equality = 0.0;    ///< max entry of |C - A*(y) - S| and |c - B^T y|
  std::vector<double> primal_min_eigenvalue;  ///< per block of X
  std::vector<double> dual_min_eigenvalue;    ///< per block of S
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  ///< primal_objective - dual_objective, NaN if not meaningful
};

Residuals residuals(const SdpProblem& problem, const SdpSolution& solution);

/// Evaluate S = C - sum_i y_i A_i for every block.
std::vector<Eigen::MatrixXd> dual_slack(const SdpProblem& problem, const Eigen::VectorXd& y);

/// SDPA sparse format of the (D) side:
///   min  c'.x   s.t.  sum_i x_i F_i - F_0 psd
/// with x = y, c' = -rhs (sign-adjusted for `sense`), F_i = -A_i, F_0 = -C.
/// Free scalars of (P) become the equalities sum_i y_i b_i = c, written as
/// a trailing diagonal block holding each equality as a pair of opposite
/// inequalities. Throws InvalidInput for problems the format cannot hold.
std::string export_sdpa(const SdpProblem& problem);
void write_sdpa(const SdpProblem& problem, std::ostream& out);

/// Parses SDPA sparse text into a dual-side problem (sense maximize). A
/// trailing diagonal block made of opposite pairs is turned back into free
/// scalars, so parse(export(p)) reproduces p's pair up to sign conventions.
SdpProblem parse_sdpa(const std::string& text);

}  // namespace multicheb::sdp

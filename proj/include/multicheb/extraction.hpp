#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multicheb/domains.hpp"
#include "multicheb/errors.hpp"
#include "multicheb/hierarchy.hpp"
#include "multicheb/poly.hpp"

namespace multicheb {

class ExtractionFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AmbiguousSignature : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct AtomicMeasure {
  std::vector<Eigen::VectorXd> atoms;
  std::vector<double> weights;

  double mass() const;
};

inline constexpr double kDefaultRankTol = 1e-6;
inline constexpr double kDefaultMergeTol = 1e-5;

/// Number of singular values above rank_tol * largest.
int numerical_rank(const Eigen::MatrixXd& A, double rank_tol = kDefaultRankTol);

struct Flatness {
  bool certified = false;
  int rank = 0;
  /// Order s with rank Hank_s = rank Hank_{s - shift}; -1 if none.
  int order = -1;
  /// rank Hank_s for s = 0..t.
  std::vector<int> ranks;
};

/// Looks for s in [max(shift, min_order), t] (largest first) with
/// rank Hank_s(y) = rank Hank_{s - shift}(y). With min_order = t only
/// s = t is tried.
Flatness flatness_check(const MomentMap& y, int d, int t, int shift,
                        double rank_tol = kDefaultRankTol, int min_order = 0);

/// Atoms and weights of the measure behind a flat truncation of order s
/// (multiplication matrices from a factor of Hank_s; joint eigenvalues via
/// a random combination). Throws ExtractionFailed.
AtomicMeasure extract_atoms(const MomentMap& y, int d, int s, double rank_tol = kDefaultRankTol,
                            unsigned seed = 12345);

/// Atoms mapped from chart to domain coordinates; weights unchanged.
AtomicMeasure to_domain(const AtomicMeasure& mu, const Chart& chart);

struct Signature {
  std::vector<Eigen::VectorXd> points;
  std::vector<int> signs;
  std::vector<double> weights;
};

/// Union with signs +1 (plus) and -1 (minus), weights normalized to 1,
/// same-sign atoms closer than merge_tol (infinity norm) merged. Throws
/// AmbiguousSignature when opposite signs collide.
Signature build_signature(const AtomicMeasure& plus, const AtomicMeasure& minus,
                          double merge_tol = kDefaultMergeTol);

struct ExtremalCheck {
  bool extremal = false;
  std::vector<double> weights;
  int null_dim = 0;
  bool rank_deficient = false;  ///< duplicate columns
};

/// Searches for a positive w with sum_w w_j sigma_j m(x_j) = 0 for every
/// monomial m of degree <= degree in the points' own coordinates. Singular
/// values below null_tol * max(1, largest) span the null space; extracted
/// (inexact) signatures need a looser value than exact ones.
ExtremalCheck verify_extremal_signature(const Signature& sig, int degree, double null_tol = 1e-10);

struct EquioscillationCheck {
  bool passed = false;
  double norm = 0.0;       ///< oracle uniform norm of g
  double min_ratio = 0.0;  ///< min over support of sigma * g(x) / norm
};

EquioscillationCheck verify_equioscillation(const Signature& sig, const Polynomial& g,
                                            const SemialgebraicDomain& domain, double tol = 1e-5,
                                            int density = 60);

}  // namespace multicheb

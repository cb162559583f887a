#include "multicheb/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "multicheb/closedform.hpp"

namespace multicheb {

double AtomicMeasure::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

int numerical_rank(const Eigen::MatrixXd& A, double rank_tol) {
  if (A.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rank_tol * sv[0]) ++r;
  return r;
}

Flatness flatness_check(const MomentMap& y, int d, int t, int shift, double rank_tol, int min_order) {
  if (shift < 1) throw InvalidInput("flatness_check: shift must be >= 1");
  Flatness out;
  for (int s = 0; s <= t; ++s) out.ranks.push_back(numerical_rank(moment_matrix(y, s, d), rank_tol));
  for (int s = t; s >= std::max(shift, min_order); --s) {
    if (out.ranks[s] == out.ranks[s - shift]) {
      out.certified = true;
      out.rank = out.ranks[s];
      out.order = s;
      break;
    }
  }
  if (!out.certified) out.rank = out.ranks[t];
  return out;
}

AtomicMeasure extract_atoms(const MomentMap& y, int d, int s, double rank_tol, unsigned seed) {
  if (s < 1) throw InvalidInput("extract_atoms: order must be >= 1");
  const Eigen::MatrixXd Ms = moment_matrix(y, s, d);
  AtomicMeasure out;
  if (Ms(0, 0) <= 0.0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ms);
  if (es.info() != Eigen::Success) throw ExtractionFailed("extract_atoms: eigendecomposition failed");
  const auto& ev = es.eigenvalues();
  const int N = static_cast<int>(ev.size());
  const double top = ev[N - 1];
  int r = 0;
  while (r < N && ev[N - 1 - r] > rank_tol * top) ++r;

  // Ms ~ V V^T; rows of V are indexed by the monomials of degree <= s.
  Eigen::MatrixXd V(N, r);
  for (int j = 0; j < r; ++j) V.col(j) = es.eigenvectors().col(N - 1 - j) * std::sqrt(ev[N - 1 - j]);

  MonomialBasis basis(d, s);
  const int n1 = static_cast<int>(basis.count_up_to(s - 1));
  // V1 N_i = rows of V at the monomials shifted by x_i.
  const Eigen::MatrixXd V1 = V.topRows(n1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd1(V1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv1 = svd1.singularValues();
  if (r == 0 || sv1[r - 1] <= rank_tol * sv1[0])
    throw ExtractionFailed("extract_atoms: truncated factor is rank deficient (no flat extension at this order)");

  std::vector<Eigen::MatrixXd> Nmat(d);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd Vi(n1, r);
    for (int row = 0; row < n1; ++row) {
      MultiIndex shifted = basis[row];
      shifted[i] += 1;
      Vi.row(row) = V.row(basis.index_of(shifted));
    }
    Eigen::MatrixXd Ni = svd1.solve(Vi);
    Nmat[i] = 0.5 * (Ni + Ni.transpose());
  }

  // Joint eigenvectors from a random convex combination; the N_i commute
  // and are symmetric for a flat truncation.
  Eigen::MatrixXd Q;
  bool ok = false;
  for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
    std::mt19937 rng(seed + 7919u * attempt);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> lam(d);
    for (auto& l : lam) l = u(rng);
    const double sum = std::accumulate(lam.begin(), lam.end(), 0.0);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(r, r);
    for (int i = 0; i < d; ++i) C += (lam[i] / sum) * Nmat[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(C);
    if (ce.info() != Eigen::Success) continue;
    const auto& cv = ce.eigenvalues();
    double gap = INFINITY;
    for (int j = 1; j < r; ++j) gap = std::min(gap, cv[j] - cv[j - 1]);
    double scale = std::max(1.0, cv.cwiseAbs().maxCoeff());
    if (r > 1 && gap < 1e-6 * scale) continue;
    Q = ce.eigenvectors();
    ok = true;
  }
  if (!ok) throw ExtractionFailed("extract_atoms: eigenvalues of the random combination are not separated");

  std::vector<Eigen::VectorXd> atoms(r, Eigen::VectorXd(d));
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < d; ++i) atoms[j][i] = Q.col(j).dot(Nmat[i] * Q.col(j));

  // Weights: least squares against all moments up to 2s.
  MonomialBasis full(d, 2 * s);
  Eigen::MatrixXd A(full.size(), r);
  Eigen::VectorXd rhs(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) rhs[i] = y.at(full[i]);
  for (int j = 0; j < r; ++j) A.col(j) = full.evaluate(std::span<const double>(atoms[j].data(), d));
  Eigen::VectorXd w = A.colPivHouseholderQr().solve(rhs);
  const double mass = rhs[0];
  for (int j = 0; j < r; ++j) {
    if (w[j] < -1e-6 * std::max(1.0, std::abs(mass)))
      throw ExtractionFailed("extract_atoms: negative weight " + std::to_string(w[j]));
    if (w[j] <= 0.0) continue;
    out.atoms.push_back(atoms[j]);
    out.weights.push_back(w[j]);
  }
  const double total = out.mass();
  if (total <= 0.0) throw ExtractionFailed("extract_atoms: no positive weight");
  for (auto& wj : out.weights) wj *= mass / total;
  return out;
}

AtomicMeasure to_domain(const AtomicMeasure& mu, const Chart& chart) {
  AtomicMeasure out = mu;
  for (auto& x : out.atoms) x = chart.to_domain(x);
  return out;
}

Signature build_signature(const AtomicMeasure& plus, const AtomicMeasure& minus, double merge_tol) {
  Signature sig;
  auto add = [&](const AtomicMeasure& mu, int sign) {
    for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
      bool merged = false;
      for (std::size_t i = 0; i < sig.points.size(); ++i) {
        if ((sig.points[i] - mu.atoms[j]).lpNorm<Eigen::Infinity>() >= merge_tol) continue;
        if (sig.signs[i] != sign)
          throw AmbiguousSignature("build_signature: an atom carries both signs");
        sig.weights[i] += mu.weights[j];
        merged = true;
        break;
      }
      if (!merged) {
        sig.points.push_back(mu.atoms[j]);
        sig.signs.push_back(sign);
        sig.weights.push_back(mu.weights[j]);
      }
    }
  };
  add(plus, 1);
  add(minus, -1);
  const double total = std::accumulate(sig.weights.begin(), sig.weights.end(), 0.0);
  if (total > 0.0)
    for (auto& w : sig.weights) w /= total;
  return sig;
}

namespace {

bool normalize_positive(Eigen::VectorXd& w) {
  double s = w.sum();
  if (s == 0.0) return false;
  w /= s;
  return w.minCoeff() > 1e-8;
}

}  // namespace

ExtremalCheck verify_extremal_signature(const Signature& sig, int degree, double null_tol) {
  ExtremalCheck out;
  const int L = static_cast<int>(sig.points.size());
  if (L < 1) throw InvalidInput("verify_extremal_signature: empty signature");
  if (static_cast<int>(sig.signs.size()) != L) throw InvalidInput("verify_extremal_signature: signs and points differ");
  const int d = static_cast<int>(sig.points[0].size());
  MonomialBasis basis(d, degree);
  Eigen::MatrixXd M(basis.size(), L);
  for (int j = 0; j < L; ++j) {
    if (sig.points[j].size() != d) throw DimensionMismatch("verify_extremal_signature", d, static_cast<int>(sig.points[j].size()));
    M.col(j) = sig.signs[j] * basis.evaluate(std::span<const double>(sig.points[j].data(), d));
  }
  for (int i = 0; i < L && !out.rank_deficient; ++i)
    for (int j = i + 1; j < L; ++j)
      if ((sig.points[i] - sig.points[j]).lpNorm<Eigen::Infinity>() < 1e-12) out.rank_deficient = true;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > null_tol * std::max(1.0, sv[0])) ++rank;
  out.null_dim = L - rank;
  if (out.null_dim == 0) return out;
  const Eigen::MatrixXd Nb = svd.matrixV().rightCols(out.null_dim);

  Eigen::VectorXd w = Nb * (Nb.transpose() * Eigen::VectorXd::Ones(L));
  bool found = normalize_positive(w);
  if (!found && out.null_dim <= 4) {
    const int k = out.null_dim;
    int total = 1;
    for (int i = 0; i < k; ++i) total *= 3;
    for (int code = 1; code < total && !found; ++code) {
      Eigen::VectorXd c(k);
      int rest = code;
      for (int i = 0; i < k; ++i) {
        c[i] = static_cast<double>(rest % 3) - 1.0;
        rest /= 3;
      }
      w = Nb * c;
      found = normalize_positive(w);
    }
  }
  if (found) {
    out.extremal = true;
    out.weights.assign(w.data(), w.data() + w.size());
  }
  return out;
}

EquioscillationCheck verify_equioscillation(const Signature& sig, const Polynomial& g,
                                            const SemialgebraicDomain& domain, double tol, int density) {
  EquioscillationCheck out;
  out.norm = oracle_uniform_norm(g, domain, density);
  out.min_ratio = INFINITY;
  for (std::size_t j = 0; j < sig.points.size(); ++j)
    out.min_ratio = std::min(out.min_ratio, sig.signs[j] * g.evaluate(sig.points[j]) / out.norm);
  out.passed = out.norm > 0.0 && out.min_ratio >= 1.0 - tol;
  return out;
}

}  // namespace multicheb

#include "multicheb/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/Sparse>

#include "multicheb/errors.hpp"

namespace multicheb::sdp {

int SdpProblem::add_block(int size) {
  block_sizes.push_back(size);
  return static_cast<int>(block_sizes.size()) - 1;
}

int SdpProblem::add_free(int count) {
  int first = num_free;
  num_free += count;
  return first;
}

int SdpProblem::add_row(LinearForm form, double value) {
  rows.push_back(std::move(form));
  rhs.push_back(value);
  return static_cast<int>(rows.size()) - 1;
}

namespace {

void check_form(const SdpProblem& p, const LinearForm& f, const char* what) {
  for (const auto& e : f.matrix_terms) {
    if (e.block < 0 || e.block >= p.num_blocks())
      throw InvalidInput(std::string(what) + ": block index out of range");
    const int s = p.block_sizes[e.block];
    if (e.row < 0 || e.row >= s || e.col < 0 || e.col >= s)
      throw InvalidInput(std::string(what) + ": matrix entry out of range");
    if (!std::isfinite(e.value)) throw InvalidInput(std::string(what) + ": non-finite coefficient");
  }
  for (const auto& [j, v] : f.free_terms) {
    if (j < 0 || j >= p.num_free) throw InvalidInput(std::string(what) + ": free index out of range");
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite coefficient");
  }
}

}  // namespace

void SdpProblem::validate() const {
  if (block_sizes.empty() && num_free == 0)
    throw InvalidInput("SdpProblem: needs at least one PSD block or free variable");
  for (int s : block_sizes)
    if (s < 1) throw InvalidInput("SdpProblem: block sides must be >= 1");
  if (rows.size() != rhs.size()) throw InvalidInput("SdpProblem: rows and rhs differ in length");
  if (num_free > 0 && rows.empty())
    throw InvalidInput("SdpProblem: free variables need at least one equality");
  check_form(*this, cost, "objective");
  for (const auto& r : rows) check_form(*this, r, "equality");
  for (double v : rhs)
    if (!std::isfinite(v)) throw InvalidInput("SdpProblem: non-finite right-hand side");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::near_optimal: return "near_optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::stalled: return "stalled";
  }
  return "stalled";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Per-block constraint structure. Cells whose coefficient columns (over
// all rows) coincide form a class; A_i restricted to the block equals
// sum_alpha L(alpha, i) P_alpha with P_alpha the 0/1 pattern of class
// alpha. Hankel and localizing blocks have one class per moment, which is
// what makes the Schur complement cheap.
struct BlockStructure {
  int size = 0;
  int num_classes = 0;
  std::vector<int> cls;    // size*size, num_classes for untouched cells
  std::vector<int> count;  // full-cell count per class
  std::vector<int> rows;   // constraint rows touching the block
  SpMat L;                 // num_classes x rows.size()
  MatrixXd C;
};

struct Compiled {
  int m = 0;
  int k = 0;
  std::vector<BlockStructure> blocks;
  MatrixXd B;  // m x k
  VectorXd c;  // k
  VectorXd b;  // m
  bool negate_cost = false;
  bool negate_rhs = false;
  std::vector<std::vector<int>> groups;
};

Compiled compile(const SdpProblem& p) {
  Compiled cp;
  cp.m = p.num_rows();
  cp.k = p.num_free;
  cp.negate_cost = p.side == Side::primal && p.sense == Sense::maximize;
  cp.negate_rhs = p.side == Side::dual && p.sense == Sense::minimize;
  const double cs = cp.negate_cost ? -1.0 : 1.0;
  const double bs = cp.negate_rhs ? -1.0 : 1.0;

  cp.b.resize(cp.m);
  for (int i = 0; i < cp.m; ++i) cp.b[i] = bs * p.rhs[i];
  cp.B = MatrixXd::Zero(cp.m, cp.k);
  for (int i = 0; i < cp.m; ++i)
    for (const auto& [j, v] : p.rows[i].free_terms) cp.B(i, j) += v;
  cp.c = VectorXd::Zero(cp.k);
  for (const auto& [j, v] : p.cost.free_terms) cp.c[j] += cs * v;

  const int nb = p.num_blocks();
  cp.blocks.resize(nb);
  std::vector<std::vector<std::vector<std::pair<int, double>>>> cells(nb);
  for (int b = 0; b < nb; ++b) {
    const int s = p.block_sizes[b];
    cp.blocks[b].size = s;
    cp.blocks[b].C = MatrixXd::Zero(s, s);
    cells[b].resize(static_cast<std::size_t>(s) * s);
  }
  for (const auto& e : p.cost.matrix_terms) {
    auto& C = cp.blocks[e.block].C;
    C(e.row, e.col) += cs * e.value;
    if (e.row != e.col) C(e.col, e.row) += cs * e.value;
  }
  for (int i = 0; i < cp.m; ++i) {
    for (const auto& e : p.rows[i].matrix_terms) {
      const int s = p.block_sizes[e.block];
      const int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
      auto& list = cells[e.block][static_cast<std::size_t>(r) * s + c];
      if (!list.empty() && list.back().first == i)
        list.back().second += e.value;
      else
        list.emplace_back(i, e.value);
    }
  }

  for (int b = 0; b < nb; ++b) {
    auto& bs_ = cp.blocks[b];
    const int s = bs_.size;
    std::map<std::vector<std::pair<int, double>>, int> ids;
    std::vector<int> upper_cls(static_cast<std::size_t>(s) * s, -1);
    std::vector<const std::vector<std::pair<int, double>>*> reps;
    for (int r = 0; r < s; ++r) {
      for (int c = r; c < s; ++c) {
        auto& list = cells[b][static_cast<std::size_t>(r) * s + c];
        std::erase_if(list, [](const auto& pr) { return pr.second == 0.0; });
        if (list.empty()) continue;
        auto [it, inserted] = ids.try_emplace(list, static_cast<int>(reps.size()));
        if (inserted) reps.push_back(&it->first);
        upper_cls[static_cast<std::size_t>(r) * s + c] = it->second;
      }
    }
    bs_.num_classes = static_cast<int>(reps.size());
    const int K = bs_.num_classes;
    bs_.cls.assign(static_cast<std::size_t>(s) * s, K);
    bs_.count.assign(K, 0);
    for (int r = 0; r < s; ++r) {
      for (int c = r; c < s; ++c) {
        int a = upper_cls[static_cast<std::size_t>(r) * s + c];
        if (a < 0) continue;
        bs_.cls[static_cast<std::size_t>(r) * s + c] = a;
        bs_.cls[static_cast<std::size_t>(c) * s + r] = a;
        bs_.count[a] += r == c ? 1 : 2;
      }
    }
    std::vector<int> touched;
    for (const auto* rep : reps)
      for (const auto& pr : *rep) touched.push_back(pr.first);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    bs_.rows = touched;
    std::vector<Eigen::Triplet<double>> trips;
    for (int a = 0; a < K; ++a) {
      for (const auto& [i, v] : *reps[a]) {
        int col = static_cast<int>(std::lower_bound(touched.begin(), touched.end(), i) - touched.begin());
        trips.emplace_back(a, col, v);
      }
    }
    bs_.L.resize(K, static_cast<int>(touched.size()));
    bs_.L.setFromTriplets(trips.begin(), trips.end());
    bs_.L.makeCompressed();
  }

  // Union-find over rows that meet in a block.
  std::vector<int> parent(cp.m);
  for (int i = 0; i < cp.m; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& bs_ : cp.blocks)
    for (std::size_t j = 1; j < bs_.rows.size(); ++j) parent[find(bs_.rows[j])] = find(bs_.rows[0]);
  std::map<int, int> group_of;
  for (int i = 0; i < cp.m; ++i) {
    auto [it, inserted] = group_of.try_emplace(find(i), static_cast<int>(cp.groups.size()));
    if (inserted) cp.groups.emplace_back();
    cp.groups[it->second].push_back(i);
  }
  return cp;
}

// A(W) for symmetric block matrices W.
VectorXd apply_A(const Compiled& cp, const std::vector<MatrixXd>& W) {
  VectorXd out = VectorXd::Zero(cp.m);
  for (std::size_t b = 0; b < cp.blocks.size(); ++b) {
    const auto& bs = cp.blocks[b];
    if (bs.num_classes == 0) continue;
    VectorXd v = VectorXd::Zero(bs.num_classes + 1);
    const int s = bs.size;
    for (int c = 0; c < s; ++c) {
      const double* col = W[b].col(c).data();
      const int* cc = &bs.cls[static_cast<std::size_t>(c) * s];
      for (int r = 0; r < s; ++r) v[cc[r]] += col[r];
    }
    VectorXd part = bs.L.transpose() * v.head(bs.num_classes);
    for (std::size_t j = 0; j < bs.rows.size(); ++j) out[bs.rows[j]] += part[j];
  }
  return out;
}

// sum_i y_i A_i restricted to block b.
MatrixXd apply_At(const BlockStructure& bs, const VectorXd& y) {
  const int s = bs.size;
  MatrixXd out = MatrixXd::Zero(s, s);
  if (bs.num_classes == 0) return out;
  VectorXd ys(bs.rows.size());
  for (std::size_t j = 0; j < bs.rows.size(); ++j) ys[j] = y[bs.rows[j]];
  VectorXd u = VectorXd::Zero(bs.num_classes + 1);
  u.head(bs.num_classes) = bs.L * ys;
  for (int c = 0; c < s; ++c) {
    const int* cc = &bs.cls[static_cast<std::size_t>(c) * s];
    double* col = out.col(c).data();
    for (int r = 0; r < s; ++r) col[r] = u[cc[r]];
  }
  return out;
}

// Adds the HKM Schur complement contribution Tr(A_i X A_j Z) of one block.
void add_schur_block(const BlockStructure& bs, const MatrixXd& X, const MatrixXd& Z, MatrixXd& M) {
  const int s = bs.size;
  const int K = bs.num_classes;
  if (K == 0) return;
  const int ld = K + 1;
  std::vector<double> N(static_cast<std::size_t>(ld) * ld, 0.0);
  for (int a = 0; a < s; ++a) {
    const int* ca = &bs.cls[static_cast<std::size_t>(a) * s];
    for (int d = a; d < s; ++d) {
      const double z = (a == d ? 0.5 : 1.0) * Z(d, a);
      if (z == 0.0) continue;
      const int* cd = &bs.cls[static_cast<std::size_t>(d) * s];
      for (int bb = 0; bb < s; ++bb) {
        const int alpha = ca[bb];
        if (alpha == K) continue;
        double* Nr = &N[static_cast<std::size_t>(alpha) * ld];
        const double* xr = X.col(bb).data();
        for (int c = 0; c < s; ++c) Nr[cd[c]] += z * xr[c];
      }
    }
  }
  MatrixXd Mt(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      Mt(a, b) = N[static_cast<std::size_t>(a) * ld + b] + N[static_cast<std::size_t>(b) * ld + a];
  MatrixXd T = Mt * bs.L;
  MatrixXd Mb = bs.L.transpose() * T;
  const int nr = static_cast<int>(bs.rows.size());
  for (int j = 0; j < nr; ++j)
    for (int i = 0; i < nr; ++i) M(bs.rows[i], bs.rows[j]) += Mb(i, j);
}

double max_step(const MatrixXd& X, const MatrixXd& D) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd W = llt.matrixL().solve(D);
  W = llt.matrixL().solve(W.transpose().eval());
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

double inner(const std::vector<MatrixXd>& A, const std::vector<MatrixXd>& B) {
  double s = 0.0;
  for (std::size_t b = 0; b < A.size(); ++b) s += A[b].cwiseProduct(B[b]).sum();
  return s;
}

double frob(const std::vector<MatrixXd>& A) {
  double s = 0.0;
  for (const auto& a : A) s += a.squaredNorm();
  return std::sqrt(s);
}

struct Direction {
  std::vector<MatrixXd> dX, dS;
  VectorXd dy, dx;
};

// The Schur matrix is block diagonal over groups of rows that share no
// PSD block; each group is factored on its own.
class SchurSystem {
 public:
  bool factor(const MatrixXd& M, const MatrixXd& B, const std::vector<std::vector<int>>& groups) {
    groups_ = &groups;
    k_ = static_cast<int>(B.cols());
    llt_.assign(groups.size(), {});
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& idx = groups[g];
      MatrixXd Mg = M(idx, idx);
      const double maxdiag = Mg.diagonal().cwiseAbs().maxCoeff();
      double reg = 0.0;
      for (int attempt = 0;; ++attempt) {
        if (reg > 0.0) Mg.diagonal().array() += reg;
        llt_[g].compute(Mg);
        if (llt_[g].info() == Eigen::Success) break;
        if (attempt == 7) return false;
        double next = reg == 0.0 ? 1e-14 * std::max(1.0, maxdiag) : reg * 100.0;
        if (reg > 0.0) Mg.diagonal().array() -= reg;
        reg = next;
      }
    }
    if (k_ > 0) {
      W_ = apply_inverse(B);
      MatrixXd K = B.transpose() * W_;
      ldlt_.compute(K);
      if (ldlt_.info() != Eigen::Success) return false;
    }
    return true;
  }

  MatrixXd apply_inverse(const MatrixXd& R) const {
    MatrixXd out(R.rows(), R.cols());
    for (std::size_t g = 0; g < groups_->size(); ++g) {
      const auto& idx = (*groups_)[g];
      MatrixXd part = R(idx, Eigen::all);
      MatrixXd sol = llt_[g].solve(part);
      out(idx, Eigen::all) = sol;
    }
    return out;
  }

  // [M B; B^T 0][dy; dx] = [h; r]
  void solve(const VectorXd& h, const VectorXd& r, const MatrixXd& B, VectorXd& dy, VectorXd& dx) const {
    VectorXd Mh = apply_inverse(h);
    if (k_ > 0) {
      dx = ldlt_.solve(B.transpose() * Mh - r);
      dy = Mh - W_ * dx;
    } else {
      dx.resize(0);
      dy = Mh;
    }
  }

 private:
  const std::vector<std::vector<int>>* groups_ = nullptr;
  int k_ = 0;
  std::vector<Eigen::LLT<MatrixXd>> llt_;
  Eigen::LDLT<MatrixXd> ldlt_;
  MatrixXd W_;
};

}  // namespace

std::vector<MatrixXd> dual_slack(const SdpProblem& problem, const VectorXd& y) {
  Compiled cp = compile(problem);
  if (y.size() != cp.m) throw DimensionMismatch("dual_slack", cp.m, static_cast<int>(y.size()));
  // Undo the internal cost sign so that S refers to the problem's own C.
  std::vector<MatrixXd> S;
  const double cs = cp.negate_cost ? -1.0 : 1.0;
  for (const auto& bs : cp.blocks) S.push_back(cs * bs.C - apply_At(bs, y));
  return S;
}

namespace {

SdpSolution solve_core(const SdpProblem& problem, const SolverOptions& opts) {
  const Compiled cp = compile(problem);
  const int nb = static_cast<int>(cp.blocks.size());
  const int m = cp.m;

  int n_total = 0;
  for (const auto& bs : cp.blocks) n_total += bs.size;

  // Infeasible starting point scaled to the data.
  std::vector<MatrixXd> X(nb), S(nb);
  VectorXd y = VectorXd::Zero(m);
  VectorXd x = VectorXd::Zero(cp.k);
  for (int b = 0; b < nb; ++b) {
    const auto& bs = cp.blocks[b];
    const double s = bs.size;
    std::vector<double> rownorm2(bs.rows.size(), 0.0);
    for (int j = 0; j < bs.L.outerSize(); ++j)
      for (SpMat::InnerIterator it(bs.L, j); it; ++it)
        rownorm2[j] += bs.count[it.row()] * it.value() * it.value();
    double xi = std::max(10.0, std::sqrt(s));
    double eta = std::max(10.0, std::sqrt(s));
    for (std::size_t j = 0; j < bs.rows.size(); ++j) {
      double an = std::sqrt(rownorm2[j]);
      xi = std::max(xi, s * (1.0 + std::abs(cp.b[bs.rows[j]])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    eta = std::max(eta, bs.C.norm());
    X[b] = xi * MatrixXd::Identity(bs.size, bs.size);
    S[b] = eta * MatrixXd::Identity(bs.size, bs.size);
  }

  const double bnorm = cp.b.norm();
  double cnorm2 = cp.c.squaredNorm();
  for (const auto& bs : cp.blocks) cnorm2 += bs.C.squaredNorm();
  const double cnorm = std::sqrt(cnorm2);

  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  Status status = Status::stalled;
  double alpha_p = 0.0, alpha_d = 0.0;
  int tiny_steps = 0;
  int last_progress = 0;
  double progress_ref = std::numeric_limits<double>::infinity();
  int iter = 0;

  auto snapshot = [&](double pobj, double dobj, double pinf, double dinf, double gap) {
    SdpSolution s;
    s.X = X;
    s.S = S;
    s.x = x;
    s.y = y;
    s.primal_objective = pobj;
    s.dual_objective = dobj;
    s.metrics = {pinf, dinf, gap, iter};
    return s;
  };

  for (iter = 0; iter <= opts.max_iter; ++iter) {
    // Residuals.
    VectorXd rp = cp.b - apply_A(cp, X) - cp.B * x;
    std::vector<MatrixXd> Rd(nb);
    for (int b = 0; b < nb; ++b) Rd[b] = cp.blocks[b].C - apply_At(cp.blocks[b], y) - S[b];
    VectorXd rf = cp.c - cp.B.transpose() * y;

    double pobj = 0.0;
    for (int b = 0; b < nb; ++b) pobj += cp.blocks[b].C.cwiseProduct(X[b]).sum();
    pobj += cp.c.dot(x);
    const double dobj = cp.b.dot(y);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(frob(Rd) * frob(Rd) + rf.squaredNorm()) / (1.0 + cnorm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = n_total > 0 ? inner(X, S) / n_total : 0.0;

    if (opts.verbose)
      std::fprintf(stderr, "%3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e gap %.2e mu %.2e ap %.3f ad %.3f\n",
                   iter, pobj, dobj, pinf, dinf, gap, mu, alpha_p, alpha_d);

    const double score = std::max({pinf / opts.eps_feas, dinf / opts.eps_feas, gap / opts.eps_gap});
    // Stagnation: no 20% drop of the score over 10 iterations. A gap that
    // shrinks slowly from 1 is still progress.
    if (score < 0.8 * progress_ref) {
      last_progress = iter;
      progress_ref = score;
    }
    if (score < best_score) {
      best_score = score;
      best = snapshot(pobj, dobj, pinf, dinf, gap);
    }
    if (pinf <= opts.eps_feas && dinf <= opts.eps_feas && gap <= opts.eps_gap) {
      status = Status::optimal;
      break;
    }

    // Divergence certificates.
    const double ynorm = y.norm();
    if (dobj > 1e8 * (1.0 + cnorm)) {
      std::vector<MatrixXd> ray(nb);
      for (int b = 0; b < nb; ++b) ray[b] = apply_At(cp.blocks[b], y) + S[b];
      double ray_res = std::sqrt(frob(ray) * frob(ray) + (cp.B.transpose() * y).squaredNorm());
      if (ray_res / dobj < 1e-6) {
        status = Status::infeasible;  // (P) infeasible, (D) unbounded
        best = snapshot(pobj, dobj, pinf, dinf, std::numeric_limits<double>::quiet_NaN());
        break;
      }
    }
    if (pobj < -1e8 * (1.0 + bnorm)) {
      VectorXd ray = apply_A(cp, X) + cp.B * x;
      if (ray.norm() / -pobj < 1e-6) {
        status = Status::unbounded;  // (P) unbounded, (D) infeasible
        best = snapshot(pobj, dobj, pinf, dinf, std::numeric_limits<double>::quiet_NaN());
        break;
      }
    }
    (void)ynorm;
    if (iter == opts.max_iter || iter - last_progress > 10) break;

    std::vector<MatrixXd> Z(nb);
    bool ok = true;
    for (int b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(S[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Z[b] = llt.solve(MatrixXd::Identity(S[b].rows(), S[b].cols()));
      Z[b] = sym(Z[b]);
    }
    if (!ok) {
      if (opts.verbose) std::fprintf(stderr, "stop: S lost definiteness\n");
      break;
    }

    MatrixXd M = MatrixXd::Zero(m, m);
    for (int b = 0; b < nb; ++b) add_schur_block(cp.blocks[b], X[b], Z[b], M);
    M = 0.5 * (M + M.transpose()).eval();
    SchurSystem schur;
    if (!schur.factor(M, cp.B, cp.groups)) {
      if (opts.verbose) std::fprintf(stderr, "stop: Schur factorization failed\n");
      break;
    }

    std::vector<MatrixXd> XRdZ(nb);
    for (int b = 0; b < nb; ++b) XRdZ[b] = X[b] * Rd[b] * Z[b];

    auto direction = [&](const std::vector<MatrixXd>& Q) {
      Direction dir;
      std::vector<MatrixXd> T(nb);
      for (int b = 0; b < nb; ++b) T[b] = sym(Q[b] - XRdZ[b]);
      VectorXd h = rp - apply_A(cp, T);
      schur.solve(h, rf, cp.B, dir.dy, dir.dx);
      dir.dS.resize(nb);
      dir.dX.resize(nb);
      for (int b = 0; b < nb; ++b) {
        dir.dS[b] = Rd[b] - apply_At(cp.blocks[b], dir.dy);
        dir.dX[b] = sym(Q[b] - X[b] * dir.dS[b] * Z[b]);
      }
      // Iterative refinement against the exact operator; the Schur matrix
      // loses accuracy as X and S approach the boundary.
      double last = std::numeric_limits<double>::infinity();
      for (int pass = 0; pass < 8; ++pass) {
        VectorXd res = rp - apply_A(cp, dir.dX) - cp.B * dir.dx;
        VectorXd resf = rf - cp.B.transpose() * dir.dy;
        const double rn = res.norm() + resf.norm();
        if (rn <= 1e-15 * (1.0 + bnorm) || (pass >= 2 && rn > 0.5 * last)) break;
        last = rn;
        VectorXd ey, ex;
        schur.solve(res, resf, cp.B, ey, ex);
        dir.dy += ey;
        if (cp.k > 0) dir.dx += ex;
        for (int b = 0; b < nb; ++b) {
          MatrixXd E = apply_At(cp.blocks[b], ey);
          dir.dS[b] -= E;
          dir.dX[b] += sym(X[b] * E * Z[b]);
        }
      }
      return dir;
    };
    auto steps = [&](const Direction& dir, double gamma) {
      double ap = 1.0, ad = 1.0;
      for (int b = 0; b < nb; ++b) {
        ap = std::min(ap, gamma * max_step(X[b], dir.dX[b]));
        ad = std::min(ad, gamma * max_step(S[b], dir.dS[b]));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    std::vector<MatrixXd> Q(nb);
    for (int b = 0; b < nb; ++b) Q[b] = -X[b];
    Direction pred = direction(Q);
    auto [ap_aff, ad_aff] = steps(pred, 1.0);
    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b)
      mu_aff += (X[b] + ap_aff * pred.dX[b]).cwiseProduct(S[b] + ad_aff * pred.dS[b]).sum();
    mu_aff /= std::max(1, n_total);
    double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
    if (pinf > 1e-2 || dinf > 1e-2) sigma = std::max(sigma, 0.1);

    // Corrector.
    for (int b = 0; b < nb; ++b) Q[b] = sigma * mu * Z[b] - X[b] - pred.dX[b] * pred.dS[b] * Z[b];
    Direction corr = direction(Q);
    const double gamma = 0.9 + 0.09 * std::min(alpha_p, alpha_d);
    std::tie(alpha_p, alpha_d) = steps(corr, gamma);

    for (int b = 0; b < nb; ++b) {
      X[b] += alpha_p * corr.dX[b];
      S[b] += alpha_d * corr.dS[b];
    }
    if (cp.k > 0) x += alpha_p * corr.dx;
    y += alpha_d * corr.dy;

    if (alpha_p < 1e-8 && alpha_d < 1e-8) {
      if (++tiny_steps >= 3) break;
    } else {
      tiny_steps = 0;
    }
  }

  SdpSolution out = std::move(best);
  if (status == Status::stalled && out.metrics.primal_residual <= opts.near_optimal_factor * opts.eps_feas &&
      out.metrics.dual_residual <= opts.near_optimal_factor * opts.eps_feas &&
      out.metrics.gap <= opts.near_optimal_factor * opts.eps_gap)
    status = Status::near_optimal;
  out.metrics.iterations = iter;

  // Map the internal pair back to the problem's own sign conventions.
  if (cp.negate_cost) {
    out.primal_objective = -out.primal_objective;
    out.dual_objective = -out.dual_objective;
    out.y = -out.y;
    for (auto& Sb : out.S) Sb = -Sb;
    // S is the slack of the negated cost; recompute against the real C.
    out.S = dual_slack(problem, out.y);
  }
  if (cp.negate_rhs) {
    out.primal_objective = -out.primal_objective;
    out.dual_objective = -out.dual_objective;
  }
  if (problem.side == Side::dual) {
    // Primal certificates of the internal pair speak about (D) in reverse.
    if (status == Status::infeasible) status = Status::unbounded;
    else if (status == Status::unbounded) status = Status::infeasible;
  }
  out.objective = problem.side == Side::primal ? out.primal_objective : out.dual_objective;
  out.status = status;
  return out;
}

double evaluate_matrix_part(const LinearForm& f, const std::vector<MatrixXd>& X) {
  double v = 0.0;
  for (const auto& e : f.matrix_terms)
    v += e.value * (e.row == e.col ? X[e.block](e.row, e.col) : 2.0 * X[e.block](e.row, e.col));
  return v;
}

// Free scalars are removed by solving k pivot equalities for them; the
// augmented Schur system they otherwise need becomes badly conditioned
// near degenerate optima.
struct Reduction {
  SdpProblem problem;
  std::vector<int> pivots;  // original rows solved for x
  std::vector<int> kept;    // original rows of the reduced problem
  MatrixXd G;               // B_P^{-1}
  double offset = 0.0;      // added to both objectives
};

void accumulate(std::map<std::tuple<int, int, int>, double>& acc, const LinearForm& f, double w) {
  for (const auto& e : f.matrix_terms)
    acc[{e.block, std::min(e.row, e.col), std::max(e.row, e.col)}] += w * e.value;
}

LinearForm to_form(const std::map<std::tuple<int, int, int>, double>& acc, double scale) {
  LinearForm f;
  for (const auto& [key, v] : acc) {
    if (std::abs(v) <= 1e-14 * scale) continue;
    auto [b, r, c] = key;
    f.add_matrix(b, r, c, v);
  }
  return f;
}

std::optional<Reduction> eliminate_free(const SdpProblem& p) {
  const int m = p.num_rows(), k = p.num_free;
  if (m <= k) return std::nullopt;
  MatrixXd B = MatrixXd::Zero(m, k);
  for (int i = 0; i < m; ++i)
    for (const auto& [j, v] : p.rows[i].free_terms) B(i, j) += v;
  Eigen::FullPivLU<MatrixXd> lu(B);
  if (lu.rank() < k) return std::nullopt;
  Reduction red;
  const auto& perm = lu.permutationP().indices();
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[perm[i]] = i;  // order[r] = original row at position r of P B
  std::vector<char> is_pivot(m, 0);
  for (int r = 0; r < k; ++r) {
    red.pivots.push_back(order[r]);
    is_pivot[order[r]] = 1;
  }
  std::sort(red.pivots.begin(), red.pivots.end());
  for (int i = 0; i < m; ++i)
    if (!is_pivot[i]) red.kept.push_back(i);

  MatrixXd BP(k, k);
  for (int r = 0; r < k; ++r) BP.row(r) = B.row(red.pivots[r]);
  red.G = BP.fullPivLu().inverse();
  VectorXd c = VectorXd::Zero(k);
  for (const auto& [j, v] : p.cost.free_terms) c[j] += v;
  VectorXd bP(k);
  for (int r = 0; r < k; ++r) bP[r] = p.rhs[red.pivots[r]];

  double scale = 1.0;
  for (const auto& row : p.rows)
    for (const auto& e : row.matrix_terms) scale = std::max(scale, std::abs(e.value));

  SdpProblem& q = red.problem;
  q.block_sizes = p.block_sizes;
  q.sense = p.sense;
  q.side = p.side;
  const VectorXd w = red.G.transpose() * c;
  {
    std::map<std::tuple<int, int, int>, double> acc;
    accumulate(acc, p.cost, 1.0);
    for (int r = 0; r < k; ++r)
      if (w[r] != 0.0) accumulate(acc, p.rows[red.pivots[r]], -w[r]);
    q.cost = to_form(acc, scale);
    red.offset = w.dot(bP);
  }
  for (int i : red.kept) {
    const VectorXd e = (B.row(i) * red.G).transpose();
    std::map<std::tuple<int, int, int>, double> acc;
    accumulate(acc, p.rows[i], 1.0);
    double rhs = p.rhs[i];
    for (int r = 0; r < k; ++r) {
      if (std::abs(e[r]) <= 1e-14) continue;
      accumulate(acc, p.rows[red.pivots[r]], -e[r]);
      rhs -= e[r] * bP[r];
    }
    LinearForm f = to_form(acc, scale);
    if (f.matrix_terms.empty()) {
      // A redundant equality after elimination; keep the general path.
      return std::nullopt;
    }
    q.add_row(std::move(f), rhs);
  }
  return red;
}

SdpSolution restore(const SdpProblem& p, const Reduction& red, SdpSolution rs) {
  const int m = p.num_rows(), k = p.num_free;
  SdpSolution out;
  out.status = rs.status;
  out.metrics = rs.metrics;
  out.X = std::move(rs.X);
  out.S = std::move(rs.S);
  out.y = VectorXd::Zero(m);
  for (std::size_t r = 0; r < red.kept.size(); ++r) out.y[red.kept[r]] = rs.y[r];
  VectorXd bP(k), aP(k), c = VectorXd::Zero(k);
  for (int r = 0; r < k; ++r) {
    bP[r] = p.rhs[red.pivots[r]];
    aP[r] = out.X.empty() ? 0.0 : evaluate_matrix_part(p.rows[red.pivots[r]], out.X);
  }
  out.x = red.G * (bP - aP);
  for (const auto& [j, v] : p.cost.free_terms) c[j] += v;
  VectorXd bty = VectorXd::Zero(k);
  for (int i : red.kept)
    for (const auto& [j, v] : p.rows[i].free_terms) bty[j] += v * out.y[i];
  const VectorXd yP = red.G.transpose() * (c - bty);
  for (int r = 0; r < k; ++r) out.y[red.pivots[r]] = yP[r];
  out.primal_objective = rs.primal_objective + red.offset;
  out.dual_objective = rs.dual_objective + red.offset;
  out.objective = rs.objective + red.offset;
  return out;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts) {
  problem.validate();
  if (problem.num_free > 0) {
    if (auto red = eliminate_free(problem)) return restore(problem, *red, solve_core(red->problem, opts));
  }
  return solve_core(problem, opts);
}

Residuals residuals(const SdpProblem& problem, const SdpSolution& sol) {
  Residuals r;
  const int nb = problem.num_blocks();
  if (static_cast<int>(sol.X.size()) != nb || static_cast<int>(sol.S.size()) != nb)
    throw InvalidInput("residuals: solution has the wrong number of blocks");
  if (sol.y.size() != problem.num_rows() || sol.x.size() != problem.num_free)
    throw InvalidInput("residuals: solution vector sizes do not match the problem");

  for (int i = 0; i < problem.num_rows(); ++i) {
    double v = -problem.rhs[i];
    for (const auto& e : problem.rows[i].matrix_terms)
      v += e.value * (e.row == e.col ? sol.X[e.block](e.row, e.col) : 2.0 * sol.X[e.block](e.row, e.col));
    for (const auto& [j, c] : problem.rows[i].free_terms) v += c * sol.x[j];
    r.primal_equality = std::max(r.primal_equality, std::abs(v));
  }

  auto S_expected = dual_slack(problem, sol.y);
  for (int b = 0; b < nb; ++b)
    r.dual_equality = std::max(r.dual_equality, (S_expected[b] - sol.S[b]).cwiseAbs().maxCoeff());
  VectorXd cf = VectorXd::Zero(problem.num_free);
  for (const auto& [j, v] : problem.cost.free_terms) cf[j] += v;
  VectorXd bty = VectorXd::Zero(problem.num_free);
  for (int i = 0; i < problem.num_rows(); ++i)
    for (const auto& [j, v] : problem.rows[i].free_terms) bty[j] += v * sol.y[i];
  if (problem.num_free > 0) r.dual_equality = std::max(r.dual_equality, (cf - bty).cwiseAbs().maxCoeff());

  for (int b = 0; b < nb; ++b) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(sol.X[b], Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sol.S[b], Eigen::EigenvaluesOnly);
    r.primal_min_eigenvalue.push_back(ex.eigenvalues().minCoeff());
    r.dual_min_eigenvalue.push_back(es.eigenvalues().minCoeff());
  }

  double pobj = cf.dot(sol.x);
  for (const auto& e : problem.cost.matrix_terms)
    pobj += e.value * (e.row == e.col ? sol.X[e.block](e.row, e.col) : 2.0 * sol.X[e.block](e.row, e.col));
  double dobj = 0.0;
  for (int i = 0; i < problem.num_rows(); ++i) dobj += problem.rhs[i] * sol.y[i];
  r.primal_objective = pobj;
  r.dual_objective = dobj;
  const bool meaningful = sol.status == Status::optimal || sol.status == Status::near_optimal ||
                          sol.status == Status::stalled;
  r.gap = meaningful ? pobj - dobj : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace multicheb::sdp

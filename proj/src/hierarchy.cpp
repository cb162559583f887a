#include "multicheb/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "multicheb/errors.hpp"
#include "multicheb/extraction.hpp"

namespace multicheb {

namespace {

double moment_at(const MomentMap& y, const MultiIndex& l) {
  auto it = y.find(l);
  if (it == y.end()) throw InvalidInput("missing moment " + l.to_string());
  return it->second;
}

}  // namespace

Eigen::MatrixXd moment_matrix(const MomentMap& y, int t, int d) {
  auto mons = monomials_up_to(d, t);
  const int s = static_cast<int>(mons.size());
  Eigen::MatrixXd M(s, s);
  for (int a = 0; a < s; ++a)
    for (int b = a; b < s; ++b) M(a, b) = M(b, a) = moment_at(y, mons[a] + mons[b]);
  return M;
}

Eigen::MatrixXd localizing_matrix(const MomentMap& y, const Polynomial& g, int s) {
  auto mons = monomials_up_to(g.dim(), s);
  const int n = static_cast<int>(mons.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double v = 0.0;
      for (const auto& [l, c] : g.terms()) v += c * moment_at(y, mons[a] + mons[b] + l);
      M(a, b) = M(b, a) = v;
    }
  }
  return M;
}

MomentMap measure_moments(const std::vector<Eigen::VectorXd>& atoms, const std::vector<double>& weights,
                          int order) {
  if (atoms.size() != weights.size()) throw InvalidInput("measure_moments: atoms and weights differ in length");
  if (atoms.empty()) throw InvalidInput("measure_moments: empty measure");
  const int d = static_cast<int>(atoms[0].size());
  MonomialBasis basis(d, order);
  MomentMap y;
  for (const auto& l : basis.monomials()) y[l] = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (atoms[j].size() != d) throw DimensionMismatch("measure_moments", d, static_cast<int>(atoms[j].size()));
    Eigen::VectorXd v = basis.evaluate(std::span<const double>(atoms[j].data(), d));
    for (std::size_t i = 0; i < basis.size(); ++i) y[basis[i]] += weights[j] * v[i];
  }
  return y;
}

Eigen::VectorXd Chart::to_domain(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x = scale * u;
  if (center.size() > 0) x += center;
  return x;
}

Chart default_chart(const SemialgebraicDomain& domain) {
  Chart c;
  c.center = Eigen::VectorXd::Zero(domain.dim);
  if (domain.kind == DomainKind::simplex) {
    c.center.setConstant(1.0 / (domain.dim + 1));
    c.scale = domain.dim;
  }
  return c;
}

namespace {

Eigen::VectorXd center_of(const Chart& chart, int d) {
  return chart.center.size() > 0 ? chart.center : Eigen::VectorXd::Zero(d);
}

}  // namespace

Polynomial to_chart(const Polynomial& p, const Chart& chart) {
  const Eigen::VectorXd c = center_of(chart, p.dim());
  return affine_substitute(p, std::span<const double>(c.data(), c.size()), chart.scale);
}

Polynomial from_chart(const Polynomial& p, const Chart& chart) {
  // u = (x - center) / scale
  const Eigen::VectorXd c = -center_of(chart, p.dim()) / chart.scale;
  return affine_substitute(p, std::span<const double>(c.data(), c.size()), 1.0 / chart.scale);
}

SemialgebraicDomain pull_back(const SemialgebraicDomain& domain, const Chart& chart) {
  if (chart.is_identity()) return domain;
  std::vector<Polynomial> gens;
  for (const auto& g : domain.generators) gens.push_back(to_chart(g, chart));
  SemialgebraicDomain out = make_domain(domain.name, domain.kind, domain.dim, std::move(gens));
  return out;
}

MomentMap push_forward(const MomentMap& y, const Chart& chart, int order) {
  if (y.empty()) return y;
  const int d = static_cast<int>(y.begin()->first.size());
  if (chart.is_identity()) return y;
  MomentMap out;
  for (const auto& l : monomials_up_to(d, order)) {
    double v = 0.0;
    for (const auto& [m, c] : to_chart(Polynomial::monomial(l), chart).terms()) v += c * moment_at(y, m);
    out[l] = v;
  }
  return out;
}

int level_threshold(const Polynomial& f, const SemialgebraicDomain& domain) {
  return std::max(f.degree(), 0) + domain.max_half_degree();
}

namespace {

sdp::SdpProblem assemble(const Polynomial& f, int n, const SemialgebraicDomain& domain, int t,
                         const RelaxationOptions& opts) {
  const int d = domain.dim;
  if (f.dim() != d) throw DimensionMismatch("relaxation: f", d, f.dim());
  if (n < 0) throw InvalidInput("relaxation: n must be >= 0");
  if (f.is_zero()) throw InvalidInput("relaxation: f is the zero polynomial");
  const int threshold = level_threshold(f, domain);
  if (t < threshold && !opts.force_level)
    throw InvalidInput("relaxation level t=" + std::to_string(t) + " is below the threshold deg f + max n'_h = " +
                       std::to_string(threshold) + " (use force_level to override)");
  if (2 * t < f.degree()) throw InvalidInput("relaxation: 2t must be at least deg f");
  for (int h : domain.half_degrees)
    if (t < h) throw InvalidInput("relaxation: level t=" + std::to_string(t) + " leaves an empty localizing block");

  MonomialBasis moments(d, 2 * t);
  const int M = static_cast<int>(moments.size());
  auto basis_t = monomials_up_to(d, t);

  sdp::SdpProblem p;
  p.rows.resize(2 * M);
  p.rhs.assign(2 * M, 0.0);
  for (int i = 0; i < M; ++i) {
    const double fl = f.coefficient(moments[i]);
    p.rhs[i] = fl;
    p.rhs[M + i] = -fl;
  }

  for (int sign = 0; sign < 2; ++sign) {
    const int off = sign * M;
    const int mb = p.add_block(static_cast<int>(basis_t.size()));
    for (std::size_t a = 0; a < basis_t.size(); ++a)
      for (std::size_t b = a; b < basis_t.size(); ++b)
        p.rows[off + moments.index_of(basis_t[a] + basis_t[b])].add_matrix(mb, static_cast<int>(a),
                                                                            static_cast<int>(b), -1.0);
    for (std::size_t h = 0; h < domain.generators.size(); ++h) {
      const auto basis_s = monomials_up_to(d, t - domain.half_degrees[h]);
      const int lb = p.add_block(static_cast<int>(basis_s.size()));
      for (std::size_t a = 0; a < basis_s.size(); ++a) {
        for (std::size_t b = a; b < basis_s.size(); ++b) {
          const MultiIndex ab = basis_s[a] + basis_s[b];
          for (const auto& [l, g] : domain.generators[h].terms())
            p.rows[off + moments.index_of(ab + l)].add_matrix(lb, static_cast<int>(a), static_cast<int>(b), -g);
        }
      }
    }
  }

  if (n >= 1) {
    auto low = monomials_up_to(d, n - 1);
    for (const auto& l : low) {
      const int j = p.add_free();
      const int i = moments.index_of(l);
      if (i < 0) throw InvalidInput("relaxation: n - 1 exceeds 2t");
      p.rows[i].add_free(j, 1.0);
      p.rows[M + i].add_free(j, -1.0);
    }
  }
  const int c = p.add_free();
  const int zero = moments.index_of(MultiIndex(static_cast<std::size_t>(d)));
  p.rows[zero].add_free(c, 1.0);
  p.rows[M + zero].add_free(c, 1.0);
  p.cost.add_free(c, 1.0);
  return p;
}

}  // namespace

sdp::SdpProblem assemble_moment_relaxation(const Polynomial& f, int n, const SemialgebraicDomain& domain, int t,
                                           const RelaxationOptions& opts) {
  sdp::SdpProblem p = assemble(f, n, domain, t, opts);
  p.side = sdp::Side::dual;
  p.sense = sdp::Sense::maximize;
  return p;
}

sdp::SdpProblem assemble_sos_relaxation(const Polynomial& f, int n, const SemialgebraicDomain& domain, int t,
                                        const RelaxationOptions& opts) {
  sdp::SdpProblem p = assemble(f, n, domain, t, opts);
  p.side = sdp::Side::primal;
  p.sense = sdp::Sense::minimize;
  return p;
}

Polynomial recover_best_approximant(const sdp::SdpSolution& sos, const Polynomial& f, int n) {
  if (sos.status != sdp::Status::optimal && sos.status != sdp::Status::near_optimal)
    throw NumericalError("recover_best_approximant: solve status is " + sdp::to_string(sos.status));
  const int d = f.dim();
  Polynomial p(d);
  if (n < 1) return p;
  auto low = monomials_up_to(d, n - 1);
  if (sos.x.size() != static_cast<Eigen::Index>(low.size()) + 1)
    throw DimensionMismatch("recover_best_approximant", static_cast<int>(low.size()) + 1,
                            static_cast<int>(sos.x.size()));
  for (std::size_t j = 0; j < low.size(); ++j) p.add_term(low[j], sos.x[j]);
  return p;
}

MomentVector recover_moments(const sdp::SdpSolution& solution, int d, int t) {
  MonomialBasis moments(d, 2 * t);
  const int M = static_cast<int>(moments.size());
  if (solution.y.size() != 2 * M) throw DimensionMismatch("recover_moments", 2 * M, static_cast<int>(solution.y.size()));
  MomentVector mv;
  mv.dim = d;
  mv.order = 2 * t;
  for (int i = 0; i < M; ++i) {
    mv.plus[moments[i]] = solution.y[i];
    mv.minus[moments[i]] = solution.y[M + i];
  }
  return mv;
}

namespace {

sdp::Status moment_side(sdp::Status s) {
  if (s == sdp::Status::infeasible) return sdp::Status::unbounded;
  if (s == sdp::Status::unbounded) return sdp::Status::infeasible;
  return s;
}

bool usable(sdp::Status s) { return s == sdp::Status::optimal || s == sdp::Status::near_optimal; }

}  // namespace

LevelResult run_level(const Polynomial& f_in, int n, const SemialgebraicDomain& domain_in, int t,
                      const HierarchyOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  if (f_in.dim() != domain_in.dim) throw DimensionMismatch("run_level: f", domain_in.dim, f_in.dim());
  Chart chart;
  chart.center = Eigen::VectorXd::Zero(domain_in.dim);
  if (opts.use_chart) chart = default_chart(domain_in);
  const Polynomial f = to_chart(f_in, chart);
  const SemialgebraicDomain domain = pull_back(domain_in, chart);
  sdp::SdpProblem problem = assemble_sos_relaxation(f, n, domain, t, opts.relaxation);
  LevelResult out;
  out.solution = sdp::solve(problem, opts.solver);
  const auto& sol = out.solution;
  auto& rec = out.record;
  rec.t = t;
  rec.sos_status = sol.status;
  rec.moment_status = moment_side(sol.status);
  rec.ub = sol.primal_objective;
  rec.ub_prime = sol.dual_objective;
  rec.metrics = sol.metrics;

  if (usable(sol.status)) {
    out.moments = recover_moments(sol, domain.dim, t);
    out.moments.chart = chart;
    out.approximant = from_chart(recover_best_approximant(sol, f, n), chart);
    const int shift = std::max(1, domain.max_half_degree());
    const int min_order = (std::max(f.degree(), 0) + 1) / 2;
    auto plus = flatness_check(out.moments.plus, domain.dim, t, shift, opts.extraction.rank_tol, min_order);
    auto minus = flatness_check(out.moments.minus, domain.dim, t, shift, opts.extraction.rank_tol, min_order);
    rec.ranks_plus = plus.ranks;
    rec.ranks_minus = minus.ranks;
    rec.flat_order_plus = plus.order;
    rec.flat_order_minus = minus.order;
    rec.certified = plus.certified && minus.certified;
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

HierarchyReport run_hierarchy(const Polynomial& f, int n, const SemialgebraicDomain& domain,
                              const HierarchyOptions& opts) {
  const int threshold = level_threshold(f, domain);
  const int t_min = opts.t_min > 0 ? opts.t_min : threshold;
  if (t_min < threshold && !opts.relaxation.force_level)
    throw InvalidInput("run_hierarchy: t_min=" + std::to_string(t_min) + " is below the threshold " +
                       std::to_string(threshold));
  const int t_max = opts.t_max > 0 ? opts.t_max : t_min + 3;
  if (t_max < t_min) throw InvalidInput("run_hierarchy: t_max < t_min");

  HierarchyReport report;
  report.E_est = std::numeric_limits<double>::quiet_NaN();
  for (int t = t_min; t <= t_max; ++t) {
    const auto side = binomial(t + domain.dim, domain.dim);
    if (side > static_cast<std::size_t>(opts.max_block_side)) {
      if (opts.log)
        opts.log("level t=" + std::to_string(t) + " skipped: block side " + std::to_string(side) + " exceeds " +
                 std::to_string(opts.max_block_side));
      break;
    }
    LevelResult lr = run_level(f, n, domain, t, opts);
    if (opts.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "t=%d ub=%.10e ub'=%.10e status=%s certified=%d iters=%d %.1fs", t, lr.record.ub,
                    lr.record.ub_prime, sdp::to_string(lr.record.sos_status).c_str(), lr.record.certified ? 1 : 0,
                    lr.record.metrics.iterations, lr.record.seconds);
      opts.log(buf);
    }
    report.levels.push_back(lr.record);
    if (usable(lr.record.sos_status)) {
      if (!report.has_value || lr.record.ub_prime < report.E_est) report.E_est = lr.record.ub_prime;
      report.has_value = true;
      if (!report.certified) {
        report.certificate = lr.moments;
        report.approximant = lr.approximant;
      }
      if (lr.record.certified && !report.certified) {
        report.certified = true;
        report.certified_level = t;
        report.certificate = lr.moments;
        report.approximant = lr.approximant;
        if (opts.stop_when_certified) break;
      }
    }
  }
  return report;
}

}  // namespace multicheb

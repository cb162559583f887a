#include "multicheb/domains.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "multicheb/errors.hpp"

namespace multicheb {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::ball: return "ball";
    case DomainKind::hypercube: return "hypercube";
    case DomainKind::simplex: return "simplex";
    case DomainKind::cross_polytope: return "cross";
    case DomainKind::custom: return "custom";
  }
  return "custom";
}

DomainKind parse_domain_kind(const std::string& name) {
  if (name == "ball") return DomainKind::ball;
  if (name == "hypercube" || name == "cube") return DomainKind::hypercube;
  if (name == "simplex") return DomainKind::simplex;
  if (name == "cross" || name == "cross-polytope" || name == "cross_polytope")
    return DomainKind::cross_polytope;
  throw InvalidInput("unknown domain '" + name + "'");
}

int SemialgebraicDomain::max_half_degree() const {
  int m = 0;
  for (int h : half_degrees) m = std::max(m, h);
  return m;
}

SemialgebraicDomain make_domain(std::string name, DomainKind kind, int dim,
                                std::vector<Polynomial> generators) {
  if (dim < 1) throw InvalidInput("domain dimension must be >= 1");
  if (generators.empty()) throw InvalidInput("domain needs at least one generator");
  SemialgebraicDomain dom;
  dom.name = std::move(name);
  dom.kind = kind;
  dom.dim = dim;
  for (const auto& g : generators) {
    if (g.dim() != dim) throw DimensionMismatch("domain generator", dim, g.dim());
    dom.half_degrees.push_back((std::max(g.degree(), 0) + 1) / 2);
  }
  dom.generators = std::move(generators);
  return dom;
}

namespace {

Polynomial one_minus_sum_squares(int d) {
  Polynomial g = Polynomial::constant(d, 1.0);
  for (int i = 0; i < d; ++i) {
    MultiIndex k(d);
    k[i] = 2;
    g.add_term(k, -1.0);
  }
  return g;
}

void check_dim(int d) {
  if (d < 1) throw InvalidInput("domain dimension must be >= 1");
}

}  // namespace

SemialgebraicDomain make_ball(int d) {
  check_dim(d);
  return make_domain("ball", DomainKind::ball, d, {one_minus_sum_squares(d)});
}

SemialgebraicDomain make_hypercube(int d) {
  check_dim(d);
  std::vector<Polynomial> gens;
  for (int i = 0; i < d; ++i) {
    Polynomial g = Polynomial::constant(d, 1.0);
    MultiIndex k(d);
    k[i] = 2;
    g.add_term(k, -1.0);
    gens.push_back(std::move(g));
  }
  return make_domain("hypercube", DomainKind::hypercube, d, std::move(gens));
}

SemialgebraicDomain make_simplex(int d, bool redundant_ball) {
  check_dim(d);
  std::vector<Polynomial> gens;
  for (int i = 0; i < d; ++i) gens.push_back(Polynomial::variable(d, i));
  Polynomial last = Polynomial::constant(d, 1.0);
  for (int i = 0; i < d; ++i) last -= Polynomial::variable(d, i);
  gens.push_back(std::move(last));
  if (redundant_ball) gens.push_back(one_minus_sum_squares(d));
  return make_domain("simplex", DomainKind::simplex, d, std::move(gens));
}

SemialgebraicDomain make_cross_polytope(int d) {
  check_dim(d);
  if (d > 20) throw InvalidInput("cross-polytope: d > 20 would need more than 2^20 generators");
  std::vector<Polynomial> gens;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Polynomial g = Polynomial::constant(d, 1.0);
    for (int i = 0; i < d; ++i) {
      double eps = (mask >> i) & 1u ? -1.0 : 1.0;
      g -= eps * Polynomial::variable(d, i);
    }
    gens.push_back(std::move(g));
  }
  return make_domain("cross", DomainKind::cross_polytope, d, std::move(gens));
}

SemialgebraicDomain make_builtin(DomainKind kind, int d) {
  switch (kind) {
    case DomainKind::ball: return make_ball(d);
    case DomainKind::hypercube: return make_hypercube(d);
    case DomainKind::simplex: return make_simplex(d);
    case DomainKind::cross_polytope: return make_cross_polytope(d);
    case DomainKind::custom: break;
  }
  throw InvalidInput("make_builtin: custom domains have no built-in description");
}

bool contains(const SemialgebraicDomain& domain, const Eigen::VectorXd& x, double tol) {
  if (x.size() != domain.dim)
    throw DimensionMismatch("contains", domain.dim, static_cast<int>(x.size()));
  for (const auto& g : domain.generators)
    if (g.evaluate(x) < -tol) return false;
  return true;
}

namespace {

// Euclidean projection onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_unit_simplex_face(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace

Eigen::VectorXd project(const SemialgebraicDomain& domain, const Eigen::VectorXd& x) {
  switch (domain.kind) {
    case DomainKind::ball: {
      double n = x.norm();
      return n > 1.0 ? Eigen::VectorXd(x / n) : x;
    }
    case DomainKind::hypercube:
      return x.cwiseMax(-1.0).cwiseMin(1.0);
    case DomainKind::simplex: {
      Eigen::VectorXd y = x.cwiseMax(0.0);
      if (y.sum() <= 1.0) return y;
      return project_unit_simplex_face(x);
    }
    case DomainKind::cross_polytope: {
      if (x.lpNorm<1>() <= 1.0) return x;
      Eigen::VectorXd a = project_unit_simplex_face(x.cwiseAbs());
      for (int i = 0; i < x.size(); ++i) a[i] = x[i] < 0 ? -a[i] : a[i];
      return a;
    }
    case DomainKind::custom: break;
  }
  return x;
}

ReducedProblem reduce_zero_exponents(const MultiIndex& k, const SemialgebraicDomain& domain) {
  if (static_cast<int>(k.size()) != domain.dim)
    throw DimensionMismatch("reduce_zero_exponents", domain.dim, static_cast<int>(k.size()));
  if (k.is_zero()) throw InvalidInput("reduce_zero_exponents: k = 0 has nothing to approximate");
  if (domain.kind == DomainKind::custom)
    throw InvalidInput("reduce_zero_exponents: only built-in domains have a known restriction");

  ReducedProblem out;
  std::vector<int> reduced;
  for (int i = 0; i < domain.dim; ++i) {
    if (k[i] > 0) {
      out.witness.kept.push_back(i);
      reduced.push_back(k[i]);
    } else {
      out.witness.fill.push_back(0.0);
    }
  }
  out.witness.reduced = MultiIndex(std::move(reduced));
  out.changed = static_cast<int>(out.witness.kept.size()) != domain.dim;
  out.domain = out.changed ? make_builtin(domain.kind, static_cast<int>(out.witness.kept.size()))
                           : domain;
  return out;
}

MultiIndex canonicalize_exponent(const MultiIndex& k) {
  std::vector<int> e = k.exponents();
  std::sort(e.begin(), e.end(), std::greater<>());
  return MultiIndex(std::move(e));
}

std::vector<MultiIndex> canonical_exponents(int d, int n) {
  if (d < 1) throw InvalidInput("canonical_exponents: d must be >= 1");
  std::vector<MultiIndex> out;
  std::vector<int> parts;
  auto rec = [&](auto&& self, int remaining, int slots, int max_part) -> void {
    if (slots == 0) {
      if (remaining == 0) out.emplace_back(parts);
      return;
    }
    // Every remaining slot needs at least 1.
    for (int v = std::min(max_part, remaining - (slots - 1)); v >= 1; --v) {
      if (v * slots < remaining) break;
      parts.push_back(v);
      self(self, remaining - v, slots - 1, v);
      parts.pop_back();
    }
  };
  rec(rec, n, d, n);
  return out;
}

namespace {

// All nonnegative integer vectors of length d summing to total.
void compositions(int d, int total, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(cur.size()) == d - 1) {
    cur.push_back(total);
    emit(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions(d, total - v, cur, emit);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Eigen::VectorXd> grid_sample(const SemialgebraicDomain& domain, int m) {
  if (m < 2) throw InvalidInput("grid_sample: density must be >= 2");
  const int d = domain.dim;
  const double lo = domain.kind == DomainKind::simplex ? 0.0 : -1.0;
  const double hi = 1.0;
  const double h = (hi - lo) / (m - 1);

  std::vector<Eigen::VectorXd> pts;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd x(d);
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = idx[i] == m - 1 ? hi : lo + idx[i] * h;
    if (contains(domain, x, 0.0)) pts.push_back(x);
    int i = 0;
    while (i < d && ++idx[i] == m) idx[i++] = 0;
    if (i == d) break;
  }

  switch (domain.kind) {
    case DomainKind::ball: {
      if (d == 2) {
        const int n = 4 * (m - 1);
        for (int j = 0; j < n; ++j) {
          double th = 2.0 * std::numbers::pi * j / n;
          pts.push_back(Eigen::Vector2d(std::cos(th), std::sin(th)));
        }
      } else if (d == 3) {
        const int n = 2 * m * m;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < n; ++j) {
          double z = 1.0 - 2.0 * (j + 0.5) / n;
          double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          pts.push_back(Eigen::Vector3d(r * std::cos(golden * j), r * std::sin(golden * j), z));
        }
      } else if (d > 3) {
        const std::size_t base = pts.size();
        for (std::size_t j = 0; j < base; ++j) {
          double n = pts[j].norm();
          if (n > 0.0) pts.push_back(pts[j] / n);
        }
      }
      break;
    }
    case DomainKind::simplex:
    case DomainKind::cross_polytope: {
      // Lattice points of the facets sum |x_i| = 1.
      std::set<std::vector<int>> seen;
      std::vector<int> cur;
      const bool signed_facets = domain.kind == DomainKind::cross_polytope;
      const unsigned masks = signed_facets ? (1u << d) : 1u;
      compositions(d, m - 1, cur, [&](const std::vector<int>& c) {
        for (unsigned mask = 0; mask < masks; ++mask) {
          std::vector<int> s(c);
          for (int i = 0; i < d; ++i)
            if ((mask >> i) & 1u) s[i] = -s[i];
          if (!seen.insert(s).second) continue;
          Eigen::VectorXd p(d);
          for (int i = 0; i < d; ++i) p[i] = static_cast<double>(s[i]) / (m - 1);
          pts.push_back(p);
        }
      });
      break;
    }
    case DomainKind::hypercube:
    case DomainKind::custom:
      break;
  }
  return pts;
}

}  // namespace multicheb

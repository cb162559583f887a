#include "multicheb/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multicheb/errors.hpp"

namespace multicheb {

namespace {

double smallest_root(const UnivariatePolynomial& q, double lo, double hi, const char* what) {
  auto roots = real_roots(q, lo, hi);
  if (roots.empty()) throw NumericalError(std::string(what) + ": no root in the bracket");
  return *std::min_element(roots.begin(), roots.end());
}

// Global maximizer of a rational function num/den on [lo, hi] (den > 0),
// taken among the endpoints and the critical points.
double argmax_ratio(const UnivariatePolynomial& num, const UnivariatePolynomial& den, double lo, double hi) {
  UnivariatePolynomial crit = num.derivative() * den - num * den.derivative();
  std::vector<double> cands{lo, hi};
  for (double r : real_roots(crit, lo, hi)) cands.push_back(r);
  double best = lo, bestv = -INFINITY;
  for (double x : cands) {
    double v = num(x) / den(x);
    if (v > bestv) {
      bestv = v;
      best = x;
    }
  }
  return best;
}

Polynomial poly_var(int d, int i) { return Polynomial::variable(d, i); }

MultiIndex strip_and_sort(const MultiIndex& k) {
  std::vector<int> e;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] > 0) e.push_back(k[i]);
  std::sort(e.begin(), e.end(), std::greater<>());
  return MultiIndex(std::move(e));
}

}  // namespace

Ball221Constant ball_221_constant() {
  // (1+t)^2 (1-t) t and 4 (1 + 4t + 4t^2)
  UnivariatePolynomial one_plus{1.0, 1.0};
  UnivariatePolynomial num = one_plus * one_plus * UnivariatePolynomial{1.0, -1.0} * UnivariatePolynomial{0.0, 1.0};
  UnivariatePolynomial den{4.0, 16.0, 16.0};
  Ball221Constant out;
  out.tau = argmax_ratio(num, den, 0.0, 1.0);
  out.a = num(out.tau) / den(out.tau);
  return out;
}

Polynomial ball_221_polynomial() {
  const double a = ball_221_constant().a;
  Polynomial P = Polynomial::monomial(MultiIndex{2, 2, 1});
  P += a * compose(chebyshev_T(3), poly_var(3, 2));
  return P;
}

Signature ball_221_signature() {
  const double tau = ball_221_constant().tau;
  const double h = std::sqrt(3.0) / 2.0;
  const double r = std::sqrt((1.0 - tau * tau) / 2.0);
  std::vector<Eigen::Vector3d> plus{{0, 0, 1},   {h, 0, -0.5}, {-h, 0, -0.5}, {0, h, -0.5}, {0, -h, -0.5},
                                    {r, r, tau}, {r, -r, tau}, {-r, -r, tau}, {-r, r, tau}};
  Signature sig;
  for (const auto& p : plus) {
    sig.points.emplace_back(p);
    sig.signs.push_back(1);
  }
  for (const auto& p : plus) {
    sig.points.emplace_back(-p);
    sig.signs.push_back(-1);
  }
  sig.weights.assign(sig.points.size(), 1.0 / static_cast<double>(sig.points.size()));
  return sig;
}

double ball_311_value() {
  const double a = smallest_root(UnivariatePolynomial{9.0, -29.0, 24.0, -29.0, 9.0}, 0.0, 1.0, "ball_311_value");
  return (1.0 - a) * std::pow(a * a * a / 5.0, 0.25) / 5.0;
}

Simplex211Constants simplex_211_constants() {
  Simplex211Constants out;
  out.tau = smallest_root(UnivariatePolynomial{243.0, -1944.0, 4880.0, -5472.0, 2880.0}, 0.0, 0.25,
                          "simplex_211_constants");
  out.c = -3.0 / out.tau;
  out.E = out.tau * out.tau / 18.0;
  // y (1 - 2y) (y - tau)^2
  UnivariatePolynomial lin{-out.tau, 1.0};
  UnivariatePolynomial g = UnivariatePolynomial{0.0, 1.0, -2.0} * lin * lin;
  out.sigma = argmax_ratio(g, UnivariatePolynomial{1.0}, 0.0, 0.5);
  return out;
}

Polynomial simplex_211_polynomial() {
  const auto k = simplex_211_constants();
  const double c = k.c;
  Polynomial x1 = poly_var(3, 0), x2 = poly_var(3, 1), x3 = poly_var(3, 2);
  Polynomial s = x2 + x3;
  Polynomial br = -16.0 * (x1 * x1 * s) + 16.0 * (x1 * s * s) - 2.0 * (64.0 + 12.0 * c + c * c) * (x1 * x2 * x3) +
                  8.0 * (x2 * x3) - 2.0 * s + Polynomial::constant(3, 1.0);
  return Polynomial::monomial(MultiIndex{2, 1, 1}) + (1.0 / (2.0 * c * c)) * br;
}

Signature simplex_211_signature() {
  const auto k = simplex_211_constants();
  const double t = k.tau, s = k.sigma;
  std::vector<Eigen::Vector3d> plus{{0.25, 0.75, 0}, {0.25, 0, 0.75}, {0, 0.5, 0.5}, {1, 0, 0}, {1 - 2 * t, t, t}};
  std::vector<Eigen::Vector3d> minus{{0.75, 0.25, 0}, {0.75, 0, 0.25}, {0, 0, 1}, {0, 1, 0}, {1 - 2 * s, s, s}};
  Signature sig;
  for (const auto& p : plus) {
    sig.points.emplace_back(p);
    sig.signs.push_back(1);
  }
  for (const auto& p : minus) {
    sig.points.emplace_back(p);
    sig.signs.push_back(-1);
  }
  sig.weights.assign(sig.points.size(), 1.0 / static_cast<double>(sig.points.size()));
  return sig;
}

Polynomial hypercube_best_approximant(const MultiIndex& k) {
  const int d = static_cast<int>(k.size());
  if (d < 1) throw InvalidInput("hypercube_best_approximant: empty exponent");
  std::vector<UnivariatePolynomial> factors;
  for (int i = 0; i < d; ++i) {
    if (k[i] < 1) throw InvalidInput("hypercube_best_approximant: zero exponent, reduce it first");
    factors.push_back(chebyshev_T(k[i]));
  }
  const int n = k.degree();
  return Polynomial::monomial(k) - std::ldexp(1.0, -n + d) * tensor_product(factors);
}

Polynomial ball2d_best_approximant(const MultiIndex& k) {
  if (k.size() != 2) throw DimensionMismatch("ball2d_best_approximant", 2, static_cast<int>(k.size()));
  if (k[0] < 1 || k[1] < 1) throw InvalidInput("ball2d_best_approximant: exponents must be >= 1");
  const int n = k.degree();
  std::vector<UnivariatePolynomial> a{chebyshev_U(k[0]), chebyshev_U(k[1])};
  Polynomial res = tensor_product(a);
  if (k[0] >= 2 && k[1] >= 2) {
    // U_(k1-2)(x1) U_(k2-2)(x2), added: the residual then stays even or
    // odd per variable and its norm is 2^(-n+1) for every k.
    std::vector<UnivariatePolynomial> b{chebyshev_U(k[0] - 2), chebyshev_U(k[1] - 2)};
    res += tensor_product(b);
  }
  return Polynomial::monomial(k) - std::ldexp(1.0, -n) * res;
}

Polynomial simplex2d_best_approximant(const MultiIndex& k) {
  if (k.size() != 2) throw DimensionMismatch("simplex2d_best_approximant", 2, static_cast<int>(k.size()));
  if (k[1] < 1 || k[0] < k[1]) throw InvalidInput("simplex2d_best_approximant: needs k1 >= k2 >= 1");
  const int n = k.degree();
  const int m = k[0] - k[1];
  Polynomial x = poly_var(2, 0), y = poly_var(2, 1);
  Polynomial u = 2.0 * x - Polynomial::constant(2, 1.0);
  Polynomial v = 8.0 * (x * y) - Polynomial::constant(2, 1.0);
  Polynomial T = compose(chebyshev_T(m), u) * compose(chebyshev_T(k[1]), v);
  if (m >= 1) T += 8.0 * (x * y) * u * compose(chebyshev_U(m - 1), u) * compose(chebyshev_U(k[1] - 1), v);
  return Polynomial::monomial(k) - std::ldexp(1.0, -2 * n + 1) * T;
}

std::optional<KnownResult> known_error(const MultiIndex& k_in, const std::string& domain_name) {
  const DomainKind kind = parse_domain_kind(domain_name);
  const MultiIndex k = strip_and_sort(k_in);
  const int d = static_cast<int>(k.size());
  if (d == 0) throw InvalidInput("known_error: k = 0");
  const int n = k.degree();
  KnownResult out;
  out.k = k;
  out.domain = to_string(kind);

  auto pow2 = [](int e) { return std::ldexp(1.0, e); };
  auto embed_simplex_1d = [&]() {
    // x^n on [0, 1]: T_n(2x - 1) / 2^(2n-1)
    Polynomial u = 2.0 * poly_var(1, 0) - Polynomial::constant(1, 1.0);
    return Polynomial::monomial(k) - pow2(-2 * n + 1) * compose(chebyshev_T(n), u);
  };

  if (kind == DomainKind::hypercube || (d == 1 && kind != DomainKind::simplex)) {
    out.expression = "2^(-n+d) with n=" + std::to_string(n) + ", d=" + std::to_string(d);
    out.value = pow2(-n + d);
    out.best_approximant = hypercube_best_approximant(k);
    out.source = "tensor-product Chebyshev polynomials";
    return out;
  }
  if (kind == DomainKind::simplex && d == 1) {
    out.expression = "2^(-2n+1) with n=" + std::to_string(n);
    out.value = pow2(-2 * n + 1);
    out.best_approximant = embed_simplex_1d();
    out.source = "shifted Chebyshev polynomial on [0,1]";
    return out;
  }
  if (kind == DomainKind::ball && d == 2) {
    out.expression = "2^(-n+1) with n=" + std::to_string(n);
    out.value = pow2(-n + 1);
    out.best_approximant = ball2d_best_approximant(k);
    out.source = "bivariate ball, Chebyshev U products";
    return out;
  }
  if (kind == DomainKind::simplex && d == 2) {
    out.expression = "2^(-2n+1) with n=" + std::to_string(n);
    out.value = pow2(-2 * n + 1);
    out.best_approximant = simplex2d_best_approximant(k);
    out.source = "bivariate simplex";
    return out;
  }
  if (d == 3 && kind == DomainKind::ball) {
    if (k == MultiIndex{1, 1, 1}) {
      out.expression = "3^(-3/2)";
      out.value = std::pow(3.0, -1.5);
      out.source = "literature value";
      return out;
    }
    if (k == MultiIndex{2, 1, 1}) {
      out.expression = "(3-sqrt(8))/2";
      out.value = (3.0 - std::sqrt(8.0)) / 2.0;
      out.source = "literature value";
      return out;
    }
    if (k == MultiIndex{3, 1, 1}) {
      out.expression = "(1-a)(a^3/5)^(1/4)/5, a smallest root of 9t^4-29t^3+24t^2-29t+9";
      out.value = ball_311_value();
      out.source = "literature value";
      return out;
    }
    if (k == MultiIndex{2, 2, 2}) {
      out.expression = "1/72";
      out.value = 1.0 / 72.0;
      out.source = "literature value";
      return out;
    }
    if (k == MultiIndex{2, 2, 1}) {
      out.expression = "max_{t in [0,1]} (1+t)^2(1-t)t/(4(1+4t+4t^2))";
      out.value = ball_221_constant().a;
      out.best_approximant = Polynomial::monomial(k) - ball_221_polynomial();
      out.source = "explicit Chebyshev polynomial x1^2 x2^2 x3 + a T3(x3)";
      return out;
    }
    if (k == MultiIndex{4, 4, 4}) {
      out.expression = "1/(b*27^2), b ~ 21.8935834";
      out.value = 1.0 / (kConstantB * 27.0 * 27.0);
      out.source = "numeric constant b from the literature";
      return out;
    }
  }
  if (d == 3 && kind == DomainKind::simplex) {
    if (k == MultiIndex{1, 1, 1}) {
      out.expression = "1/72";
      out.value = 1.0 / 72.0;
      out.source = "literature value";
      return out;
    }
    if (k == MultiIndex{2, 1, 1}) {
      out.expression = "1/(2c^2) = tau^2/18";
      out.value = simplex_211_constants().E;
      out.best_approximant = Polynomial::monomial(k) - simplex_211_polynomial();
      out.source = "explicit Chebyshev polynomial on the simplex";
      return out;
    }
    if (k == MultiIndex{2, 2, 2}) {
      out.expression = "1/(b*27^2), b ~ 21.8935834";
      out.value = 1.0 / (kConstantB * 27.0 * 27.0);
      out.source = "numeric constant b from the literature";
      return out;
    }
  }
  return std::nullopt;
}

double oracle_uniform_norm(const Polynomial& p, const SemialgebraicDomain& domain, int density, int refine_steps) {
  if (p.dim() != domain.dim) throw DimensionMismatch("oracle_uniform_norm", domain.dim, p.dim());
  if (density < 2) throw InvalidInput("oracle_uniform_norm: density must be >= 2");
  auto pts = grid_sample(domain, density);
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = std::abs(p.evaluate(pts[i]));
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t top = std::min<std::size_t>(50, order.size());
  std::partial_sort(order.begin(), order.begin() + top, order.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] > vals[b] || (vals[a] == vals[b] && a < b); });
  double best = top > 0 ? vals[order[0]] : 0.0;

  const bool builtin = domain.kind != DomainKind::custom;
  for (std::size_t r = 0; r < top; ++r) {
    Eigen::VectorXd x = pts[order[r]];
    double fx = vals[order[r]];
    double h = 1.0 / (density - 1);
    for (int step = 0; step < refine_steps; ++step) {
      bool moved = false;
      for (int i = 0; i < domain.dim; ++i) {
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd y = x;
          y[i] += dir * h;
          if (builtin) y = project(domain, y);
          if (!contains(domain, y, 0.0) && !(builtin && contains(domain, y, 1e-14))) continue;
          double fy = std::abs(p.evaluate(y));
          if (fy > fx) {
            x = y;
            fx = fy;
            moved = true;
          }
        }
      }
      if (!moved) h *= 0.5;
    }
    best = std::max(best, fx);
  }
  return best;
}

}  // namespace multicheb

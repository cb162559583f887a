#include <cmath>
#include <cstdio>
#include <functional>

#include "app.hpp"
#include "multicheb/errors.hpp"

namespace multicheb::app {

namespace {

using nlohmann::json;

// Maximum of f on [lo, hi]: dense scan, then golden section around the best
// sample. Independent of the root-finding used in the closed forms.
double maximize_1d(const std::function<double(double)>& f, double lo, double hi) {
  const int m = 20000;
  int best = 0;
  for (int i = 1; i <= m; ++i)
    if (f(lo + (hi - lo) * i / m) > f(lo + (hi - lo) * best / m)) best = i;
  double a = lo + (hi - lo) * std::max(0, best - 1) / m;
  double b = lo + (hi - lo) * std::min(m, best + 1) / m;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) > f(d))
      b = d;
    else
      a = c;
  }
  return f(0.5 * (a + b));
}

std::string sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

Check near(std::string name, double got, double want, double tol) {
  const double diff = std::abs(got - want);
  return {std::move(name), diff <= tol, "got " + sci(got) + " want " + sci(want) + " diff " + sci(diff)};
}

Check near_rel(std::string name, double got, double want, double rel) {
  const double diff = std::abs(got - want) / std::abs(want);
  return {std::move(name), diff <= rel, "got " + sci(got) + " want " + sci(want) + " rel " + sci(diff)};
}

void signature_checks(Verification& v, const Signature& sig, int degree, const Polynomial& g,
                      const SemialgebraicDomain& dom) {
  auto ex = verify_extremal_signature(sig, degree);
  v.checks.push_back({"extremal signature", ex.extremal,
                      std::to_string(sig.points.size()) + " points, null space dim " + std::to_string(ex.null_dim)});
  auto eq = verify_equioscillation(sig, g, dom);
  v.checks.push_back({"equioscillation", eq.passed, "min sigma*g/norm " + sci(eq.min_ratio)});
  v.data["signature"] = to_json(sig, true);
  v.data["residual_norm"] = eq.norm;
}

// Chebyshev extrema grid with sign prod (-1)^j_i: the tensor product of the
// univariate extremal signatures.
Signature hypercube_signature(const MultiIndex& k) {
  const int d = static_cast<int>(k.size());
  Signature sig;
  std::vector<int> j(d, 0);
  for (;;) {
    Eigen::VectorXd x(d);
    int sign = 1;
    for (int i = 0; i < d; ++i) {
      x[i] = std::cos(M_PI * j[i] / k[i]);
      if (j[i] % 2) sign = -sign;
    }
    sig.points.push_back(x);
    sig.signs.push_back(sign);
    int i = 0;
    while (i < d && ++j[i] > k[i]) j[i++] = 0;
    if (i == d) break;
  }
  return sig;
}

Verification verify_ball_221() {
  Verification v{"ball-221"};
  const auto c = ball_221_constant();
  const double a = maximize_1d([](double t) { return (1 + t) * (1 + t) * (1 - t) * t / (4 * (1 + 4 * t + 4 * t * t)); }, 0, 1);
  v.checks.push_back(near("a against 1-D maximization", c.a, a, 1e-12));
  v.checks.push_back(near("a = 3.63000825e-2", c.a, 3.63000825e-2, 1e-8));
  const auto P = ball_221_polynomial();
  const auto dom = make_ball(3);
  v.checks.push_back(near_rel("oracle norm of P equals a", oracle_uniform_norm(P, dom), c.a, 1e-5));
  const auto sig = ball_221_signature();
  v.checks.push_back({"18 signature points", sig.points.size() == 18, std::to_string(sig.points.size())});
  signature_checks(v, sig, 4, P, dom);
  v.data["a"] = c.a;
  v.data["tau"] = c.tau;
  v.data["polynomial"] = P.to_string();
  return v;
}

Verification verify_simplex_211() {
  Verification v{"simplex-211"};
  const auto c = simplex_211_constants();
  const double tau = c.tau;
  const double q = 2880 * std::pow(tau, 4) - 5472 * std::pow(tau, 3) + 4880 * tau * tau - 1944 * tau + 243;
  v.checks.push_back({"tau is a root of the quartic in [0, 1/4]", std::abs(q) < 1e-9 && tau >= 0 && tau <= 0.25,
                      "q(tau) = " + sci(q)});
  v.checks.push_back(near("tau = 0.21998", tau, 0.21998, 1e-5));
  v.checks.push_back(near("E = tau^2/18 = 2.68850e-3", c.E, 2.68850e-3, 1e-7));
  v.checks.push_back(near("E = tau^2/18", c.E, tau * tau / 18.0, 1e-15));
  const double mx = maximize_1d([&](double y) { return y * (1 - 2 * y) * (y - tau) * (y - tau); }, 0.0, 0.5);
  v.checks.push_back(near("max y(1-2y)(y-tau)^2 = tau^2/18", mx, tau * tau / 18.0, 1e-10));
  const auto P = simplex_211_polynomial();
  const auto dom = make_simplex(3);
  v.checks.push_back(near_rel("oracle norm of P equals E", oracle_uniform_norm(P, dom), c.E, 1e-5));
  const auto sig = simplex_211_signature();
  v.checks.push_back({"10 signature points", sig.points.size() == 10, std::to_string(sig.points.size())});
  // Extremality on the face x1 + x2 + x3 = 1, in the coordinates (x1, x2).
  Signature face = sig;
  for (auto& p : face.points) p = p.head(2).eval();
  auto ex = verify_extremal_signature(face, 3);
  v.checks.push_back({"extremal in face coordinates", ex.extremal, "null space dim " + std::to_string(ex.null_dim)});
  signature_checks(v, sig, 3, P, dom);
  v.data["tau"] = tau;
  v.data["sigma"] = c.sigma;
  v.data["c"] = c.c;
  v.data["E"] = c.E;
  v.data["polynomial"] = P.to_string();
  return v;
}

Verification verify_hypercube(const MultiIndex& k) {
  Verification v{"hypercube:" + k.to_string()};
  const int d = static_cast<int>(k.size()), n = k.degree();
  const auto p = hypercube_best_approximant(k);
  const auto g = Polynomial::monomial(k) - p;
  const auto dom = make_hypercube(d);
  const double want = std::ldexp(1.0, d - n);
  v.checks.push_back({"degree <= n-1", p.degree() <= n - 1, std::to_string(p.degree())});
  v.checks.push_back(near_rel("residual norm 2^(d-n)", oracle_uniform_norm(g, dom), want, 1e-8));
  signature_checks(v, hypercube_signature(k), n - 1, g, dom);
  v.data["E"] = want;
  v.data["approximant"] = p.to_string();
  return v;
}

Verification verify_2d(const std::string& kind, MultiIndex k) {
  if (k.size() != 2) throw InvalidInput(kind + " needs two exponents");
  k = canonicalize_exponent(k);
  Verification v{kind + ":" + k.to_string()};
  const int n = k.degree();
  const bool ball = kind == "ball2d";
  const auto p = ball ? ball2d_best_approximant(k) : simplex2d_best_approximant(k);
  const auto dom = ball ? make_ball(2) : make_simplex(2);
  const double want = ball ? std::ldexp(1.0, 1 - n) : std::ldexp(1.0, 1 - 2 * n);
  v.checks.push_back({"degree <= n-1", p.degree() <= n - 1, std::to_string(p.degree())});
  v.checks.push_back(near_rel("residual norm", oracle_uniform_norm(Polynomial::monomial(k) - p, dom), want, 1e-5));
  auto known = known_error(k, ball ? "ball" : "simplex");
  v.checks.push_back({"known_error agrees", known && known->value == want, known ? sci(known->value) : "none"});
  v.data["E"] = want;
  v.data["approximant"] = p.to_string();
  return v;
}

}  // namespace

bool Verification::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

Verification verify(const std::string& name) {
  if (name == "ball-221") return verify_ball_221();
  if (name == "simplex-211") return verify_simplex_211();
  const auto colon = name.find(':');
  if (colon == std::string::npos) throw InvalidInput("unknown certificate '" + name + "'");
  const std::string kind = name.substr(0, colon);
  const MultiIndex k = parse_exponent(name.substr(colon + 1));
  if (kind == "hypercube") return verify_hypercube(k);
  if (kind == "ball2d" || kind == "simplex2d") return verify_2d(kind, k);
  throw InvalidInput("unknown certificate '" + name + "'");
}

}  // namespace multicheb::app

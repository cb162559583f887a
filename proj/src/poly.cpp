#include "multicheb/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "multicheb/errors.hpp"

namespace multicheb {

MultiIndex::MultiIndex(std::initializer_list<int> exps) : exps_(exps) {
  for (int e : exps_)
    if (e < 0) throw InvalidInput("MultiIndex: negative exponent");
}

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_)
    if (e < 0) throw InvalidInput("MultiIndex: negative exponent");
}

int MultiIndex::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("MultiIndex sum", static_cast<int>(a.size()),
                            static_cast<int>(b.size()));
  MultiIndex r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r.exps_[i] = a.exps_[i] + b.exps_[i];
  return r;
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  return a.exps_ <=> b.exps_;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(exps_[i]);
  }
  return s + ")";
}

std::size_t MultiIndexHash::operator()(const MultiIndex& k) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int e : k.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / i;
  return r;
}

namespace {

// Exponents of fixed total degree `deg` in lexicographic ascending order.
void append_degree(int d, int deg, std::vector<MultiIndex>& out) {
  std::vector<int> e(d, 0);
  // Lex ascending: the first coordinate varies slowest and starts at zero.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == d - 1) {
      e[pos] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      e[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, deg);
}

}  // namespace

std::vector<MultiIndex> monomials_up_to(int d, int t) {
  if (d < 1) throw InvalidInput("monomials_up_to: d must be >= 1");
  if (t < 0) throw InvalidInput("monomials_up_to: t must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(binomial(t + d, d));
  for (int deg = 0; deg <= t; ++deg) append_degree(d, deg, out);
  return out;
}

MonomialBasis::MonomialBasis(int d, int t)
    : dim_(d), max_degree_(t), monomials_(monomials_up_to(d, t)) {
  lookup_.reserve(monomials_.size());
  for (std::size_t i = 0; i < monomials_.size(); ++i)
    lookup_.emplace(monomials_[i], static_cast<int>(i));
}

int MonomialBasis::index_of(const MultiIndex& k) const {
  auto it = lookup_.find(k);
  return it == lookup_.end() ? -1 : it->second;
}

std::size_t MonomialBasis::count_up_to(int t) const {
  return binomial(t + dim_, dim_);
}

Eigen::VectorXd MonomialBasis::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw DimensionMismatch("MonomialBasis::evaluate", dim_,
                            static_cast<int>(x.size()));
  // powers[i][e] = x_i^e
  std::vector<std::vector<double>> powers(dim_, std::vector<double>(max_degree_ + 1, 1.0));
  for (int i = 0; i < dim_; ++i)
    for (int e = 1; e <= max_degree_; ++e) powers[i][e] = powers[i][e - 1] * x[i];
  Eigen::VectorXd v(monomials_.size());
  for (std::size_t j = 0; j < monomials_.size(); ++j) {
    double p = 1.0;
    for (int i = 0; i < dim_; ++i) p *= powers[i][monomials_[j][i]];
    v[j] = p;
  }
  return v;
}

// ---------------------------------------------------------------------------

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex(dim), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  if (i < 0 || i >= dim) throw InvalidInput("Polynomial::variable: index out of range");
  MultiIndex k(dim);
  k[i] = 1;
  return monomial(k);
}

Polynomial Polynomial::monomial(const MultiIndex& k, double coeff) {
  Polynomial p(static_cast<int>(k.size()));
  p.add_term(k, coeff);
  return p;
}

int Polynomial::degree() const {
  // Graded order puts the highest degree last.
  return terms_.empty() ? -1 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const MultiIndex& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& k, double coeff) {
  if (static_cast<int>(k.size()) != dim_)
    throw DimensionMismatch("Polynomial::add_term", dim_, static_cast<int>(k.size()));
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(k, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw DimensionMismatch("Polynomial::evaluate", dim_, static_cast<int>(x.size()));
  double sum = 0.0;
  for (const auto& [k, c] : terms_) {
    double m = c;
    for (int i = 0; i < dim_; ++i)
      for (int e = 0; e < k[i]; ++e) m *= x[i];
    sum += m;
  }
  return sum;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  if (x.size() != dim_)
    throw DimensionMismatch("Polynomial::gradient", dim_, static_cast<int>(x.size()));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& [k, c] : terms_) {
    for (int j = 0; j < dim_; ++j) {
      if (k[j] == 0) continue;
      double m = c * k[j];
      for (int i = 0; i < dim_; ++i) {
        int e = k[i] - (i == j ? 1 : 0);
        for (int r = 0; r < e; ++r) m *= x[i];
      }
      g[j] += m;
    }
  }
  return g;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.dim_ != dim_)
    throw DimensionMismatch("Polynomial addition", dim_, other.dim_);
  for (const auto& [k, c] : other.terms_) add_term(k, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.dim_ != dim_)
    throw DimensionMismatch("Polynomial subtraction", dim_, other.dim_);
  for (const auto& [k, c] : other.terms_) add_term(k, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dim_ != b.dim_) throw DimensionMismatch("Polynomial product", a.dim_, b.dim_);
  Polynomial r(a.dim_);
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) r.add_term(ka + kb, ca * cb);
  return r;
}

Polynomial scale(const Polynomial& p, double s) { return p * s; }

Polynomial Polynomial::embed(int dim, std::span<const int> positions) const {
  if (static_cast<int>(positions.size()) != dim_)
    throw DimensionMismatch("Polynomial::embed", dim_, static_cast<int>(positions.size()));
  Polynomial r(dim);
  for (const auto& [k, c] : terms_) {
    MultiIndex kk(dim);
    for (int i = 0; i < dim_; ++i) {
      if (positions[i] < 0 || positions[i] >= dim)
        throw InvalidInput("Polynomial::embed: position out of range");
      kk[positions[i]] += k[i];
    }
    r.add_term(kk, c);
  }
  return r;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  char buf[64];
  bool first = true;
  for (const auto& [k, c] : terms_) {
    if (!first) out += " + ";
    first = false;
    std::snprintf(buf, sizeof buf, "%.17g", c);
    out += buf;
    if (k.is_zero()) continue;
    out += " *";
    for (int i = 0; i < dim_; ++i) {
      if (k[i] == 0) continue;
      out += " x" + std::to_string(i + 1) + "^" + std::to_string(k[i]);
    }
  }
  return out;
}

Polynomial Polynomial::parse(const std::string& text, int dim) {
  Polynomial p(dim);
  std::istringstream in(text);
  std::string tok;
  // Tokens: coefficient, optional '*', factors xI or xI^E, separated by '+'.
  double coeff = 0.0;
  MultiIndex k(dim);
  bool have_term = false;
  auto flush = [&] {
    if (have_term) p.add_term(k, coeff);
    have_term = false;
    k = MultiIndex(dim);
    coeff = 0.0;
  };
  while (in >> tok) {
    if (tok == "+") {
      flush();
    } else if (tok == "*") {
      continue;
    } else if (tok[0] == 'x') {
      if (!have_term) {
        have_term = true;
        coeff = 1.0;
      }
      auto caret = tok.find('^');
      int var = std::stoi(tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
      int e = caret == std::string::npos ? 1 : std::stoi(tok.substr(caret + 1));
      if (var < 1 || var > dim) throw InvalidInput("Polynomial::parse: variable out of range: " + tok);
      k[var - 1] += e;
    } else {
      if (have_term) throw InvalidInput("Polynomial::parse: missing '+' before " + tok);
      std::size_t used = 0;
      try {
        coeff = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw InvalidInput("Polynomial::parse: bad token " + tok);
      }
      if (used != tok.size()) throw InvalidInput("Polynomial::parse: bad token " + tok);
      have_term = true;
    }
  }
  flush();
  return p;
}

// ---------------------------------------------------------------------------

UnivariatePolynomial::UnivariatePolynomial(std::vector<double> coeffs)
    : c_(std::move(coeffs)) {
  trim();
}

UnivariatePolynomial::UnivariatePolynomial(std::initializer_list<double> coeffs)
    : c_(coeffs) {
  trim();
}

void UnivariatePolynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double UnivariatePolynomial::coefficient(int power) const {
  return power >= 0 && power < static_cast<int>(c_.size()) ? c_[power] : 0.0;
}

double UnivariatePolynomial::operator()(double t) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * t + *it;
  return r;
}

UnivariatePolynomial UnivariatePolynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return UnivariatePolynomial(std::move(d));
}

UnivariatePolynomial operator+(const UnivariatePolynomial& a,
                               const UnivariatePolynomial& b) {
  std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
  return UnivariatePolynomial(std::move(r));
}

UnivariatePolynomial operator-(const UnivariatePolynomial& a,
                               const UnivariatePolynomial& b) {
  return a + (-1.0) * b;
}

UnivariatePolynomial operator*(const UnivariatePolynomial& a,
                               const UnivariatePolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return UnivariatePolynomial(std::move(r));
}

UnivariatePolynomial operator*(double s, const UnivariatePolynomial& a) {
  std::vector<double> r = a.c_;
  for (double& v : r) v *= s;
  return UnivariatePolynomial(std::move(r));
}

UnivariatePolynomial chebyshev_T(int n) {
  if (n < 0) throw InvalidInput("chebyshev_T: n must be >= 0");
  UnivariatePolynomial prev{1.0};
  if (n == 0) return prev;
  UnivariatePolynomial cur{0.0, 1.0};
  const UnivariatePolynomial two_t{0.0, 2.0};
  for (int k = 2; k <= n; ++k) {
    UnivariatePolynomial next = two_t * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

UnivariatePolynomial chebyshev_U(int n) {
  if (n < -1) throw InvalidInput("chebyshev_U: n must be >= -1");
  if (n == -1) return {};
  return (1.0 / (n + 1)) * chebyshev_T(n + 1).derivative();
}

Polynomial tensor_product(std::span<const UnivariatePolynomial> factors) {
  const int d = static_cast<int>(factors.size());
  if (d < 1) throw InvalidInput("tensor_product: need at least one factor");
  Polynomial r = Polynomial::constant(d, 1.0);
  for (int i = 0; i < d; ++i) {
    Polynomial f(d);
    const auto& c = factors[i].coefficients();
    for (std::size_t e = 0; e < c.size(); ++e) {
      MultiIndex k(d);
      k[i] = static_cast<int>(e);
      f.add_term(k, c[e]);
    }
    r = r * f;
  }
  return r;
}

Polynomial compose(const UnivariatePolynomial& q, const Polynomial& p) {
  // Horner in the polynomial ring.
  Polynomial r(p.dim());
  const auto& c = q.coefficients();
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    r = r * p + Polynomial::constant(p.dim(), *it);
  return r;
}

Polynomial affine_substitute(const Polynomial& p, std::span<const double> center, double scale) {
  const int d = p.dim();
  if (static_cast<int>(center.size()) != d)
    throw DimensionMismatch("affine_substitute", d, static_cast<int>(center.size()));
  std::vector<Polynomial> lin;
  for (int i = 0; i < d; ++i) lin.push_back(Polynomial::constant(d, center[i]) + scale * Polynomial::variable(d, i));
  // Powers of each linear factor are reused across terms.
  std::vector<std::vector<Polynomial>> pw(d, std::vector<Polynomial>{Polynomial::constant(d, 1.0)});
  Polynomial out(d);
  for (const auto& [k, c] : p.terms()) {
    Polynomial t = Polynomial::constant(d, c);
    for (int i = 0; i < d; ++i) {
      while (static_cast<int>(pw[i].size()) <= k[i]) pw[i].push_back(pw[i].back() * lin[i]);
      if (k[i] > 0) t = t * pw[i][k[i]];
    }
    out += t;
  }
  return out;
}

std::vector<double> real_roots(const UnivariatePolynomial& q, double lo, double hi,
                               double tol, int subdivisions) {
  if (q.is_zero()) throw InvalidInput("real_roots: zero polynomial");
  if (!(lo < hi)) throw InvalidInput("real_roots: empty interval");
  if (subdivisions < 1) throw InvalidInput("real_roots: subdivisions must be positive");

  const double scale = 1.0 + [&] {
    double m = 0.0;
    for (double c : q.coefficients()) m = std::max(m, std::abs(c));
    return m;
  }();
  const auto dq = q.derivative();
  const double h = (hi - lo) / subdivisions;

  auto bisect = [&](double a, double b) {
    double fa = q(a);
    for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + std::abs(a)); ++it) {
      double m = 0.5 * (a + b);
      double fm = q(m);
      if (fm == 0.0) return m;
      if ((fa < 0) == (fm < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  auto newton = [&](double x) {
    for (int it = 0; it < 50; ++it) {
      double fx = q(x), dfx = dq(x);
      if (dfx == 0.0) break;
      double step = fx / dfx;
      double nx = x - step;
      if (!(nx >= lo && nx <= hi)) break;
      if (std::abs(q(nx)) > std::abs(fx)) break;
      x = nx;
      if (std::abs(step) < 1e-17 * (1.0 + std::abs(x))) break;
    }
    return x;
  };

  std::vector<double> roots;
  double x0 = lo, f0 = q(lo);
  for (int i = 1; i <= subdivisions; ++i) {
    double x1 = i == subdivisions ? hi : lo + i * h;
    double f1 = q(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if ((f0 < 0) != (f1 < 0) && f1 != 0.0) {
      roots.push_back(newton(bisect(x0, x1)));
    } else if (f1 != 0.0) {
      // Even-multiplicity root: |q| has a local minimum near zero; use the
      // derivative's sign change to locate it.
      double d0 = dq(x0), d1 = dq(x1);
      if ((d0 < 0) != (d1 < 0) && (f0 > 0) == (d0 < 0)) {
        double a = x0, b = x1;
        double da = d0;
        for (int it = 0; it < 200; ++it) {
          double m = 0.5 * (a + b);
          double dm = dq(m);
          if ((da < 0) == (dm < 0)) {
            a = m;
            da = dm;
          } else {
            b = m;
          }
        }
        double m = 0.5 * (a + b);
        if (std::abs(q(m)) <= tol * scale) roots.push_back(m);
      }
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0 && (roots.empty() || roots.back() != x0)) roots.push_back(x0);

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) { return std::abs(a - b) <= 4 * h * 1e-6; }),
              roots.end());
  for (double r : roots) {
    if (std::abs(q(r)) > tol * scale)
      throw NumericalError("real_roots: residual above tolerance at " + std::to_string(r));
  }
  return roots;
}

}  // namespace multicheb

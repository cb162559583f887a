#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace multicheb {

/// Exponent tuple of a monomial x_1^{k_1} ... x_d^{k_d}.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// tuples compared lexicographically. Every Hankel/localizing matrix in the
/// library is indexed in this order.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : exps_(dim, 0) {}
  MultiIndex(std::initializer_list<int> exps);
  explicit MultiIndex(std::vector<int> exps);

  std::size_t size() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int& operator[](std::size_t i) { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  int degree() const;
  bool is_zero() const { return degree() == 0; }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;
  friend std::strong_ordering operator<=>(const MultiIndex& a,
                                          const MultiIndex& b);

  std::string to_string() const;

 private:
  std::vector<int> exps_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& k) const noexcept;
};

/// All exponents of length d with total degree <= t, graded-lex ascending.
/// The result has binom(t+d, d) entries.
std::vector<MultiIndex> monomials_up_to(int d, int t);

/// binom(n, k) for the small arguments used in sizing.
std::size_t binomial(int n, int k);

/// Position lookup into monomials_up_to(d, t).
class MonomialBasis {
 public:
  MonomialBasis(int d, int t);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<MultiIndex>& monomials() const { return monomials_; }

  /// Index of k, or -1 if |k| exceeds the basis degree.
  int index_of(const MultiIndex& k) const;
  /// Number of basis elements of degree <= t (t <= max_degree).
  std::size_t count_up_to(int t) const;

  /// Values m_k(x) for every k in the basis.
  Eigen::VectorXd evaluate(std::span<const double> x) const;

 private:
  int dim_;
  int max_degree_;
  std::vector<MultiIndex> monomials_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> lookup_;
};

/// Sparse d-variate polynomial with real coefficients. Stored coefficients
/// are never exactly zero.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, double>;

  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int i);
  static Polynomial monomial(const MultiIndex& k, double coeff = 1.0);

  int dim() const { return dim_; }
  /// Total degree, -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }

  double coefficient(const MultiIndex& k) const;
  void add_term(const MultiIndex& k, double coeff);

  double evaluate(std::span<const double> x) const;
  double evaluate(const Eigen::VectorXd& x) const {
    return evaluate(std::span<const double>(x.data(), x.size()));
  }

  /// Gradient at x, used by the uniform-norm oracle's local polish.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  /// Polynomial with the same terms, re-embedded by placing variable i of
  /// this polynomial at position positions[i] of a dim-variate polynomial.
  Polynomial embed(int dim, std::span<const int> positions) const;

  /// Largest absolute coefficient.
  double max_abs_coefficient() const;

  /// `c * x1^a x2^b` terms in graded-lex order, 17 significant digits.
  std::string to_string() const;
  /// Inverse of to_string; also accepts `x1` for `x1^1`.
  static Polynomial parse(const std::string& text, int dim);

 private:
  int dim_ = 0;
  Terms terms_;
};

Polynomial scale(const Polynomial& p, double s);

/// Dense univariate polynomial, ascending powers.
class UnivariatePolynomial {
 public:
  UnivariatePolynomial() = default;
  explicit UnivariatePolynomial(std::vector<double> coeffs);
  UnivariatePolynomial(std::initializer_list<double> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<double>& coefficients() const { return c_; }
  double coefficient(int power) const;
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }

  double operator()(double t) const;
  UnivariatePolynomial derivative() const;

  friend UnivariatePolynomial operator+(const UnivariatePolynomial& a,
                                        const UnivariatePolynomial& b);
  friend UnivariatePolynomial operator-(const UnivariatePolynomial& a,
                                        const UnivariatePolynomial& b);
  friend UnivariatePolynomial operator*(const UnivariatePolynomial& a,
                                        const UnivariatePolynomial& b);
  friend UnivariatePolynomial operator*(double s, const UnivariatePolynomial& a);
  friend bool operator==(const UnivariatePolynomial&,
                         const UnivariatePolynomial&) = default;

 private:
  void trim();
  std::vector<double> c_;
};

/// Chebyshev polynomial of the first kind.
UnivariatePolynomial chebyshev_T(int n);
/// Chebyshev polynomial of the second kind, U_n = T_{n+1}' / (n+1); U_{-1} = 0.
UnivariatePolynomial chebyshev_U(int n);

/// (p_1 ⊗ ... ⊗ p_d)(x) = p_1(x_1) ... p_d(x_d).
Polynomial tensor_product(std::span<const UnivariatePolynomial> factors);

/// q(p(x)) for univariate q and multivariate p.
Polynomial compose(const UnivariatePolynomial& q, const Polynomial& p);

/// p(center + scale * u) as a polynomial in u. Total degree is preserved
/// for scale != 0.
Polynomial affine_substitute(const Polynomial& p, std::span<const double> center, double scale);

/// Real roots of q in [lo, hi], ascending. Brackets sign changes (and
/// near-tangential minima of |q|) on a uniform subdivision, then polishes
/// by bisection and Newton. Throws NumericalError when a returned root has
/// |q(root)| above tol * (1 + max |coeff|).
std::vector<double> real_roots(const UnivariatePolynomial& q, double lo,
                               double hi, double tol = 1e-12,
                               int subdivisions = 4096);

}  // namespace multicheb

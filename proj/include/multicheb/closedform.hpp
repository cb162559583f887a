#pragma once

#include <optional>
#include <string>

#include "multicheb/domains.hpp"
#include "multicheb/extraction.hpp"
#include "multicheb/poly.hpp"

namespace multicheb {

struct KnownResult {
  MultiIndex k;
  std::string domain;
  std::string expression;
  double value = 0.0;
  /// p* of degree <= |k| - 1, when one is known explicitly.
  std::optional<Polynomial> best_approximant;
  std::string source;
};

/// Exact E(k, domain) where a closed form is known. Zero exponents are
/// dropped first (the restriction to a coordinate face is the same kind of
/// domain) and the rest sorted descending.
std::optional<KnownResult> known_error(const MultiIndex& k, const std::string& domain_name);

/// Stored decimal for E((4,4,4), B) = E((2,2,2), S) = 1 / (b * 27^2).
inline constexpr double kConstantB = 21.8935834;

struct Ball221Constant {
  double a = 0.0;
  double tau = 0.0;  ///< argmax
};
/// max over t in [0,1] of (1+t)^2 (1-t) t / (4 (1 + 4t + 4t^2)).
Ball221Constant ball_221_constant();
/// x1^2 x2^2 x3 + a T_3(x3).
Polynomial ball_221_polynomial();
/// 9 points S+ on the sphere and S- = -S+.
Signature ball_221_signature();

/// (1 - a)(a^3/5)^(1/4)/5 with a the smallest root of 9t^4 - 29t^3 + 24t^2 - 29t + 9.
double ball_311_value();

struct Simplex211Constants {
  double tau = 0.0;
  double sigma = 0.0;
  double c = 0.0;
  double E = 0.0;
};
Simplex211Constants simplex_211_constants();
/// x1^2 x2 x3 + E [-16 x1^2 (x2 + x3) + 16 x1 (x2 + x3)^2
///   - 2 (64 + 12c + c^2) x1 x2 x3 + 8 x2 x3 - 2 (x2 + x3) + 1].
Polynomial simplex_211_polynomial();
Signature simplex_211_signature();

/// m_k - 2^(-n+d) T_k1 x ... x T_kd. Requires every k_i >= 1.
Polynomial hypercube_best_approximant(const MultiIndex& k);
/// m_k - 2^(-n) (U_k1 x U_k2 + U_(k1-2) x U_(k2-2)), U_(-1) = 0.
Polynomial ball2d_best_approximant(const MultiIndex& k);
/// m_k - 2^(-2n+1) T_(k1,k2) for k1 >= k2 >= 1, where
/// T_(k1,k2)(x,y) = T_(k1-k2)(2x-1) T_k2(8xy-1)
///                + 8xy (2x-1) U_(k1-k2-1)(2x-1) U_(k2-1)(8xy-1).
Polynomial simplex2d_best_approximant(const MultiIndex& k);

inline constexpr int kDefaultOracleDensity = 60;

/// max |p| over grid_sample(domain, density), the 50 largest grid values
/// polished by projected coordinate ascent with step halving.
double oracle_uniform_norm(const Polynomial& p, const SemialgebraicDomain& domain,
                           int density = kDefaultOracleDensity, int refine_steps = 80);

}  // namespace multicheb

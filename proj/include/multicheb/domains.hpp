#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multicheb/poly.hpp"

namespace multicheb {

enum class DomainKind { ball, hypercube, simplex, cross_polytope, custom };

std::string to_string(DomainKind kind);
/// Accepts the CLI spellings: ball, hypercube (or cube), simplex, cross
/// (or cross-polytope).
DomainKind parse_domain_kind(const std::string& name);

/// Basic semialgebraic set {x : g_h(x) >= 0 for all h}.
struct SemialgebraicDomain {
  std::string name;
  DomainKind kind = DomainKind::custom;
  int dim = 0;
  std::vector<Polynomial> generators;
  /// ceil(deg(g_h) / 2) per generator.
  std::vector<int> half_degrees;

  int max_half_degree() const;
};

/// Builds a domain from explicit generators; half degrees are derived.
SemialgebraicDomain make_domain(std::string name, DomainKind kind, int dim,
                                std::vector<Polynomial> generators);

/// Unit euclidean ball: 1 - sum x_i^2 >= 0.
SemialgebraicDomain make_ball(int d);
/// [-1, 1]^d: 1 - x_i^2 >= 0 for each i.
SemialgebraicDomain make_hypercube(int d);
/// Standard simplex: x_i >= 0 and 1 - sum x_i >= 0. With
/// `redundant_ball`, 1 - sum x_i^2 >= 0 is appended for solver conditioning.
SemialgebraicDomain make_simplex(int d, bool redundant_ball = false);
/// l1 unit ball as the 2^d half-spaces 1 - sum eps_i x_i >= 0. Refuses d > 20.
SemialgebraicDomain make_cross_polytope(int d);

SemialgebraicDomain make_builtin(DomainKind kind, int d);

inline constexpr double kDefaultMembershipTol = 1e-9;

/// True iff g_h(x) >= -tol for every generator.
bool contains(const SemialgebraicDomain& domain, const Eigen::VectorXd& x,
              double tol = kDefaultMembershipTol);

/// Closest point of a built-in domain (used by the oracle's local polish).
Eigen::VectorXd project(const SemialgebraicDomain& domain, const Eigen::VectorXd& x);

/// Outcome of dropping zero exponents: E(k, domain) = E(reduced, reduced domain).
struct ReductionWitness {
  /// 0-based coordinates with k_i > 0.
  std::vector<int> kept;
  /// Fill values for the dropped coordinates (always 0 for the built-ins).
  std::vector<double> fill;
  MultiIndex reduced;
};

struct ReducedProblem {
  ReductionWitness witness;
  SemialgebraicDomain domain;
  /// False when k had no zero entries and the domain is returned as is.
  bool changed = false;
};

ReducedProblem reduce_zero_exponents(const MultiIndex& k,
                                     const SemialgebraicDomain& domain);

/// Exponent entries sorted descending.
MultiIndex canonicalize_exponent(const MultiIndex& k);

/// Partitions of n into exactly d positive parts, each sorted descending,
/// in lexicographically descending order: e.g. (4,1,1), (3,2,1), (2,2,2).
std::vector<MultiIndex> canonical_exponents(int d, int n);

/// Deterministic covering of the domain by a lattice of m points per axis
/// of its bounding box, plus boundary points (sphere or facets).
std::vector<Eigen::VectorXd> grid_sample(const SemialgebraicDomain& domain, int m);

}  // namespace multicheb

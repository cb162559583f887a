#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "multicheb/closedform.hpp"
#include "multicheb/domains.hpp"
#include "multicheb/extraction.hpp"
#include "multicheb/hierarchy.hpp"

namespace multicheb::app {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { ok = 0, solver_failure = 2, invalid_input = 3, verify_failed = 4, io_error = 5 };

struct ComputeOptions {
  int t_min = 0;
  int t_max = 0;
  bool force_level = false;
  unsigned seed = 12345;
  bool extract = true;
  /// Keep solving after the first certified level.
  bool all_levels = false;
  std::function<void(const std::string&)> log;
};

struct ComputeResult {
  MultiIndex k_input;
  /// Sorted, zero exponents dropped.
  MultiIndex k;
  std::string domain;
  int dim = 0;
  bool reduced = false;
  std::vector<int> kept;
  HierarchyReport report;
  std::optional<KnownResult> known;
  /// Signature in the coordinates of the reduced problem.
  std::optional<Signature> signature;
  std::optional<ExtremalCheck> extremal;
  std::optional<EquioscillationCheck> equioscillation;
  /// Rank threshold at which the signature was extracted.
  double extraction_rank_tol = 0.0;
  std::string extraction_error;
  std::vector<std::string> notes;
};

/// Parses "2,2,1"; throws InvalidInput.
MultiIndex parse_exponent(const std::string& text);

/// Canonicalize, reduce, run the hierarchy, extract and check a signature
/// when certified. Throws InvalidInput for a zero or malformed exponent.
ComputeResult compute(const MultiIndex& k, const std::string& domain, const ComputeOptions& opts = {});

nlohmann::json to_json(const ComputeResult& r);
nlohmann::json to_json(const Signature& sig, bool certified);

/// Table of E over canonical_exponents(d, n) for n = d..n_max.
struct TableEntry {
  MultiIndex k;
  int n = 0;
  double value = 0.0;
  bool has_value = false;
  bool certified = false;
  int level = -1;
};

std::vector<TableEntry> compute_table(const std::string& domain, int d, int n_max, int jobs,
                                      const ComputeOptions& opts = {});
/// Columns per degree, each scaled by the power of ten of its largest
/// entry; '*' marks an uncertified value.
std::string render_table(const std::string& domain, const std::vector<TableEntry>& entries);
std::string render_csv(const std::string& domain, const std::vector<TableEntry>& entries);

/// One named check of a closed-form certificate.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Verification {
  std::string name;
  std::vector<Check> checks;
  nlohmann::json data;
  bool passed() const;
};

/// ball-221, simplex-211, hypercube:k, ball2d:k, simplex2d:k.
Verification verify(const std::string& name);

}  // namespace multicheb::app

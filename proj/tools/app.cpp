#include "app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "multicheb/errors.hpp"

namespace multicheb::app {

namespace {

using nlohmann::json;

// Null-space threshold for signatures read off solver output: atoms carry
// errors far above the 1e-10 used for exact signatures.
constexpr double kExtractedNullTol = 1e-5;
constexpr double kExtractedEquioscTol = 1e-4;

json vec_json(const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

json poly_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [k, c] : p.terms()) terms.push_back({{"k", k.exponents()}, {"c", c}});
  return {{"dim", p.dim()}, {"text", p.to_string()}, {"terms", terms}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

MultiIndex parse_exponent(const std::string& text) {
  std::vector<int> e;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InvalidInput("bad exponent entry '" + item + "'");
    }
    if (used != item.size() || v < 0) throw InvalidInput("bad exponent entry '" + item + "'");
    e.push_back(v);
  }
  if (e.empty()) throw InvalidInput("empty exponent");
  return MultiIndex(std::move(e));
}

ComputeResult compute(const MultiIndex& k, const std::string& domain, const ComputeOptions& opts) {
  if (k.size() == 0 || k.is_zero()) throw InvalidInput("k must have a positive entry");
  ComputeResult r;
  r.k_input = k;
  const DomainKind kind = parse_domain_kind(domain);
  r.domain = to_string(kind);
  r.dim = static_cast<int>(k.size());
  auto red = reduce_zero_exponents(k, make_builtin(kind, r.dim));
  r.reduced = red.changed;
  r.kept = red.witness.kept;
  r.k = canonicalize_exponent(red.witness.reduced);
  if (r.reduced)
    r.notes.push_back("zero exponents dropped: solved for k=" + r.k.to_string() + " on the " + r.domain + " in dimension " +
                      std::to_string(r.k.size()));
  if (r.k != red.witness.reduced) r.notes.push_back("exponent sorted to " + r.k.to_string());
  const SemialgebraicDomain dom = red.domain;
  r.known = known_error(r.k, r.domain);

  const Polynomial f = Polynomial::monomial(r.k);
  const int n = r.k.degree();
  HierarchyOptions h;
  h.t_min = opts.t_min;
  h.t_max = opts.t_max;
  h.relaxation.force_level = opts.force_level;
  h.extraction.seed = opts.seed;
  h.log = opts.log;
  h.stop_when_certified = !opts.all_levels;
  r.report = run_hierarchy(f, n, dom, h);

  if (opts.extract && r.report.certified && r.report.certificate) {
    const MomentVector& mv = *r.report.certificate;
    const int d = static_cast<int>(r.k.size());
    const int t = r.report.certified_level;
    const int shift = std::max(1, dom.max_half_degree());
    const int min_order = (n + 1) / 2;
    // Chart scaling spreads the Hankel spectrum, so a small atom can sit
    // below the certification threshold and spoil the rank-r factor. Lower
    // thresholds are tried until the signature checks out; the first
    // successful extraction is kept otherwise.
    bool verified = false;
    for (double tol : {h.extraction.rank_tol, 1e-7, 1e-8}) {
      try {
        auto fp = flatness_check(mv.plus, d, t, shift, tol, min_order);
        auto fm = flatness_check(mv.minus, d, t, shift, tol, min_order);
        if (!fp.certified || !fm.certified) throw ExtractionFailed("no flat order at rank threshold " + fmt("%g", tol));
        auto plus = to_domain(extract_atoms(mv.plus, d, fp.order, tol, opts.seed), mv.chart);
        auto minus = to_domain(extract_atoms(mv.minus, d, fm.order, tol, opts.seed), mv.chart);
        auto sig = build_signature(plus, minus);
        auto ext = verify_extremal_signature(sig, n - 1, kExtractedNullTol);
        std::optional<EquioscillationCheck> eq;
        if (r.report.approximant) eq = verify_equioscillation(sig, f - *r.report.approximant, dom, kExtractedEquioscTol);
        verified = ext.extremal && eq && eq->passed;
        if (!r.signature || verified) {
          r.signature = sig;
          r.extremal = ext;
          r.equioscillation = eq;
          r.extraction_rank_tol = tol;
          r.extraction_error.clear();
        }
      } catch (const NumericalError& e) {
        if (!r.signature && r.extraction_error.empty()) r.extraction_error = e.what();
      }
      if (verified) break;
    }
  }
  return r;
}

json to_json(const Signature& sig, bool certified) {
  json pts = json::array();
  for (const auto& p : sig.points) pts.push_back(vec_json(p));
  return {{"points", pts}, {"signs", sig.signs}, {"weights", sig.weights}, {"certified", certified}};
}

json to_json(const ComputeResult& r) {
  json j;
  j["schema"] = kSchemaVersion;
  j["k"] = r.k_input.exponents();
  j["domain"] = r.domain;
  j["reduced_k"] = r.k.exponents();
  if (r.reduced) j["reduction"] = {{"kept", r.kept}};
  j["notes"] = r.notes;
  json levels = json::array();
  for (const auto& l : r.report.levels) {
    levels.push_back({{"t", l.t},
                      {"ub", l.ub},
                      {"ub_prime", l.ub_prime},
                      {"sos_status", sdp::to_string(l.sos_status)},
                      {"moment_status", sdp::to_string(l.moment_status)},
                      {"certified", l.certified},
                      {"ranks_plus", l.ranks_plus},
                      {"ranks_minus", l.ranks_minus},
                      {"iterations", l.metrics.iterations},
                      {"primal_residual", l.metrics.primal_residual},
                      {"dual_residual", l.metrics.dual_residual},
                      {"gap", l.metrics.gap},
                      {"seconds", l.seconds}});
  }
  j["levels"] = levels;
  j["E_est"] = r.report.has_value ? json(r.report.E_est) : json(nullptr);
  j["certified"] = r.report.certified;
  if (r.report.certified) j["certified_level"] = r.report.certified_level;
  if (r.signature) {
    json s = to_json(*r.signature, r.report.certified);
    if (r.extremal) s["extremal"] = r.extremal->extremal;
    if (r.equioscillation) {
      s["equioscillates"] = r.equioscillation->passed;
      s["residual_norm"] = r.equioscillation->norm;
      s["min_ratio"] = r.equioscillation->min_ratio;
    }
    s["rank_tol"] = r.extraction_rank_tol;
    j["signature"] = s;
  }
  if (!r.extraction_error.empty()) j["extraction_error"] = r.extraction_error;
  if (r.report.approximant) j["best_approximant"] = poly_json(*r.report.approximant);
  if (r.known) {
    json cf = {{"expression", r.known->expression}, {"value", r.known->value}, {"source", r.known->source}};
    if (r.report.has_value) cf["abs_diff"] = std::abs(r.report.E_est - r.known->value);
    j["closed_form"] = cf;
  }
  return j;
}

std::vector<TableEntry> compute_table(const std::string& domain, int d, int n_max, int jobs,
                                      const ComputeOptions& opts) {
  std::vector<TableEntry> entries;
  for (int n = d; n <= n_max; ++n)
    for (const auto& k : canonical_exponents(d, n)) entries.push_back({k, n});
  ComputeOptions o = opts;
  o.extract = false;
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < entries.size();) {
      try {
        auto r = compute(entries[i].k, domain, o);
        entries[i].has_value = r.report.has_value;
        entries[i].value = r.report.E_est;
        entries[i].certified = r.report.certified;
        entries[i].level = r.report.certified ? r.report.certified_level
                                              : (r.report.levels.empty() ? -1 : r.report.levels.back().t);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(entries.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return entries;
}

std::string render_table(const std::string& domain, const std::vector<TableEntry>& entries) {
  std::vector<int> degrees;
  for (const auto& e : entries)
    if (degrees.empty() || degrees.back() != e.n) degrees.push_back(e.n);
  std::vector<std::vector<const TableEntry*>> cols(degrees.size());
  std::vector<int> expo(degrees.size(), 0);
  std::size_t rows = 0;
  for (std::size_t c = 0; c < degrees.size(); ++c) {
    double mx = 0.0;
    for (const auto& e : entries)
      if (e.n == degrees[c]) {
        cols[c].push_back(&e);
        if (e.has_value) mx = std::max(mx, std::abs(e.value));
      }
    expo[c] = mx > 0.0 ? static_cast<int>(std::floor(std::log10(mx))) : 0;
    rows = std::max(rows, cols[c].size());
  }
  const int width = 26;
  auto pad = [&](std::string s) {
    s.resize(std::max<std::size_t>(s.size(), width), ' ');
    return s;
  };
  std::string out = "E(k, " + domain + ")\n";
  for (std::size_t c = 0; c < degrees.size(); ++c)
    out += pad("n=" + std::to_string(degrees[c]) + " (x10^" + std::to_string(expo[c]) + ")") + "|";
  out += "\n";
  for (std::size_t c = 0; c < degrees.size(); ++c) out += std::string(width, '-') + "+";
  out += "\n";
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t c = 0; c < degrees.size(); ++c) {
      std::string cell;
      if (row < cols[c].size()) {
        const auto& e = *cols[c][row];
        cell = e.k.to_string() + " ";
        cell += e.has_value ? fmt("%.4g", e.value / std::pow(10.0, expo[c])) : std::string("n/a");
        if (!e.certified) cell += "*";
      }
      out += pad(cell) + "|";
    }
    out += "\n";
  }
  out += "* not certified by a rank drop\n";
  return out;
}

std::string render_csv(const std::string& domain, const std::vector<TableEntry>& entries) {
  std::string out = "domain,k,n,E,certified,level\n";
  for (const auto& e : entries) {
    std::string k = e.k.to_string();
    out += domain + ",\"" + k + "\"," + std::to_string(e.n) + "," + (e.has_value ? fmt("%.10e", e.value) : "") + "," +
           (e.certified ? "1" : "0") + "," + std::to_string(e.level) + "\n";
  }
  return out;
}

}  // namespace multicheb::app

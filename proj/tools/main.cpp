// multicheb: best uniform approximation of monomials by lower-degree
// polynomials via the moment-SOS hierarchy.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "app.hpp"
#include "multicheb/errors.hpp"
#include "multicheb/sdp.hpp"

using namespace multicheb;
using namespace multicheb::app;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string k;
  std::string domain = "ball";
  int t_min = 0;
  int t_max = 0;
  int t = 0;
  int dim = 3;
  int n_max = 6;
  int jobs = 1;
  std::string format;  ///< empty: per-command default
  std::string out;
  std::string export_sdpa;
  unsigned seed = 12345;
  bool force_level = false;
  std::string name;
};

// CHEBY_LOG=info (or debug) echoes hierarchy progress on stderr.
std::function<void(const std::string&)> make_logger() {
  const char* env = std::getenv("CHEBY_LOG");
  const std::string level = env ? env : "";
  if (level != "info" && level != "debug") return {};
  return [](const std::string& line) { std::cerr << line << "\n"; };
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw IoError("cannot open " + cfg.out);
  f << text;
  if (!f) throw IoError("write failed: " + cfg.out);
}

ComputeOptions compute_options(const RunConfig& cfg) {
  ComputeOptions o;
  o.t_min = cfg.t_min;
  o.t_max = cfg.t_max;
  o.force_level = cfg.force_level;
  o.seed = cfg.seed;
  o.log = make_logger();
  return o;
}

std::string stats_text(const sdp::SdpProblem& p) {
  std::ostringstream s;
  s << "blocks " << p.num_blocks() << "\nsizes";
  for (int b : p.block_sizes) s << " " << b;
  s << "\nconstraints " << p.num_rows() << "\nfree " << p.num_free << "\n";
  return s.str();
}

void write_sdpa_file(const std::string& path, const sdp::SdpProblem& p) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  sdp::write_sdpa(p, f);
  if (!f) throw IoError("write failed: " + path);
}

sdp::SdpProblem moment_problem(const RunConfig& cfg, int t) {
  MultiIndex k = parse_exponent(cfg.k);
  auto dom = make_builtin(parse_domain_kind(cfg.domain), static_cast<int>(k.size()));
  if (k.is_zero()) throw InvalidInput("k must have a positive entry");
  RelaxationOptions ro;
  ro.force_level = cfg.force_level;
  const auto f = Polynomial::monomial(k);
  if (t <= 0) t = level_threshold(f, dom);
  return assemble_moment_relaxation(f, k.degree(), dom, t, ro);
}

int cmd_compute(const RunConfig& cfg) {
  const MultiIndex k = parse_exponent(cfg.k);
  if (!cfg.export_sdpa.empty()) write_sdpa_file(cfg.export_sdpa, moment_problem(cfg, cfg.t_min));
  auto r = compute(k, cfg.domain, compute_options(cfg));
  if (cfg.format == "json") {
    emit(cfg, to_json(r).dump(2) + "\n");
  } else {
    std::ostringstream s;
    for (const auto& note : r.notes) s << "note: " << note << "\n";
    for (const auto& l : r.report.levels)
      s << "t=" << l.t << " ub=" << l.ub << " ub'=" << l.ub_prime << " " << sdp::to_string(l.sos_status)
        << (l.certified ? " certified" : "") << "\n";
    s.precision(10);
    s << "E_est " << r.report.E_est << (r.report.certified ? "" : " (not certified)") << "\n";
    if (r.known) s << "closed form " << r.known->expression << " = " << r.known->value << "\n";
    if (r.signature) s << "signature " << r.signature->points.size() << " points\n";
    if (!r.extraction_error.empty()) s << "extraction: " << r.extraction_error << "\n";
    emit(cfg, s.str());
  }
  return r.report.has_value ? ok : solver_failure;
}

int cmd_table(const RunConfig& cfg) {
  auto entries = compute_table(cfg.domain, cfg.dim, cfg.n_max, cfg.jobs, compute_options(cfg));
  const std::string name = to_string(parse_domain_kind(cfg.domain));
  if (cfg.format == "csv") {
    emit(cfg, render_csv(name, entries));
  } else if (cfg.format == "json") {
    json rows = json::array();
    for (const auto& e : entries)
      rows.push_back({{"k", e.k.exponents()}, {"n", e.n}, {"E", e.has_value ? json(e.value) : json(nullptr)},
                      {"certified", e.certified}, {"level", e.level}});
    emit(cfg, json{{"schema", kSchemaVersion}, {"domain", name}, {"d", cfg.dim}, {"entries", rows}}.dump(2) + "\n");
  } else {
    emit(cfg, render_table(name, entries));
  }
  for (const auto& e : entries)
    if (!e.has_value) return solver_failure;
  return ok;
}

int cmd_verify(const RunConfig& cfg) {
  auto v = verify(cfg.name);
  if (cfg.format == "json") {
    json checks = json::array();
    for (const auto& c : v.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    emit(cfg, json{{"schema", kSchemaVersion}, {"name", v.name}, {"passed", v.passed()}, {"checks", checks},
                   {"data", v.data}}
                  .dump(2) + "\n");
  } else {
    std::string s = v.name + "\n";
    for (const auto& c : v.checks) s += (c.passed ? "  pass  " : "  FAIL  ") + c.name + ": " + c.detail + "\n";
    emit(cfg, s);
  }
  return v.passed() ? ok : verify_failed;
}

int cmd_export(const RunConfig& cfg) {
  auto p = moment_problem(cfg, cfg.t);
  if (cfg.out.empty()) throw InvalidInput("export-sdpa needs --out");
  write_sdpa_file(cfg.out, p);
  std::cout << stats_text(p);
  return ok;
}

int cmd_closed_form(const RunConfig& cfg) {
  const MultiIndex k = parse_exponent(cfg.k);
  auto r = known_error(k, cfg.domain);
  json j{{"schema", kSchemaVersion}, {"k", k.exponents()}, {"domain", to_string(parse_domain_kind(cfg.domain))}};
  if (r) {
    j["expression"] = r->expression;
    j["value"] = r->value;
    j["source"] = r->source;
    if (r->best_approximant) j["best_approximant"] = r->best_approximant->to_string();
  } else {
    j["value"] = nullptr;
  }
  emit(cfg, j.dump(2) + "\n");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Multivariate Chebyshev polynomials by the moment-SOS hierarchy"};
  cli.require_subcommand(1);
  RunConfig cfg;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--format", cfg.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    c->add_option("--out", cfg.out, "output file (default stdout)");
  };
  auto add_problem = [&](CLI::App* c) {
    c->add_option("--k", cfg.k, "exponent, e.g. 2,2,1")->required();
    c->add_option("--domain", cfg.domain, "ball, cross, simplex or hypercube");
    c->add_flag("--force-level", cfg.force_level, "allow levels below the threshold");
  };

  auto* compute_cmd = cli.add_subcommand("compute", "error of best approximation for one monomial");
  add_problem(compute_cmd);
  add_common(compute_cmd);
  compute_cmd->add_option("--t-min", cfg.t_min, "first level (default: threshold)");
  compute_cmd->add_option("--t-max", cfg.t_max, "last level (default: t-min + 3)");
  compute_cmd->add_option("--seed", cfg.seed, "extraction seed");
  compute_cmd->add_option("--export-sdpa", cfg.export_sdpa, "also write the first level in SDPA format");

  auto* table_cmd = cli.add_subcommand("table", "table of E over all monomials of degree dim..n-max");
  table_cmd->add_option("--domain", cfg.domain, "ball, cross, simplex or hypercube");
  table_cmd->add_option("--dim", cfg.dim, "dimension");
  table_cmd->add_option("--n-max", cfg.n_max, "largest degree");
  table_cmd->add_option("--t-min", cfg.t_min);
  table_cmd->add_option("--t-max", cfg.t_max);
  table_cmd->add_option("--jobs", cfg.jobs, "concurrent entries");
  table_cmd->add_option("--seed", cfg.seed);
  add_common(table_cmd);

  auto* verify_cmd = cli.add_subcommand("verify", "check a closed-form Chebyshev polynomial");
  verify_cmd->add_option("name", cfg.name, "ball-221, simplex-211, hypercube:K, ball2d:K, simplex2d:K")->required();
  add_common(verify_cmd);

  auto* export_cmd = cli.add_subcommand("export-sdpa", "write the moment relaxation in SDPA sparse format");
  add_problem(export_cmd);
  export_cmd->add_option("--t", cfg.t, "level (default: threshold)");
  export_cmd->add_option("--out", cfg.out, "output file")->required();

  auto* closed_cmd = cli.add_subcommand("closed-form", "known exact value, if any");
  add_problem(closed_cmd);
  add_common(closed_cmd);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return invalid_input;
  }
  if (cfg.format.empty()) cfg.format = table_cmd->parsed() || verify_cmd->parsed() ? "text" : "json";

  try {
    if (compute_cmd->parsed()) return cmd_compute(cfg);
    if (table_cmd->parsed()) return cmd_table(cfg);
    if (verify_cmd->parsed()) return cmd_verify(cfg);
    if (export_cmd->parsed()) return cmd_export(cfg);
    if (closed_cmd->parsed()) return cmd_closed_form(cfg);
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return invalid_input;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return io_error;
  } catch (const NumericalError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return solver_failure;
  }
  return invalid_input;
}

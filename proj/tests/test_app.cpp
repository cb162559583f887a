#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "app.hpp"
#include "multicheb/errors.hpp"

using namespace multicheb;
using nlohmann::json;

namespace {

// Subset of JSON Schema used by the shipped report schema: type, const,
// enum, minimum, required, properties, items.
bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  return false;
}

void validate(const json& v, const json& schema, const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    bool any = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) any = any || type_matches(v, t.get<std::string>());
    } else {
      any = type_matches(v, schema["type"].get<std::string>());
    }
    if (!any) errors.push_back(path + ": wrong type");
  }
  if (schema.contains("const") && v != schema["const"]) errors.push_back(path + ": const");
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(path + ": not in enum");
  }
  if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>())
    errors.push_back(path + ": below minimum");
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema["required"])
        if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing " + r.get<std::string>());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (v.contains(key)) validate(v[key], sub, path + "." + key, errors);
  }
  if (v.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], schema["items"], path + "[" + std::to_string(i) + "]", errors);
}

std::vector<std::string> schema_errors(const json& report) {
  std::ifstream f(MULTICHEB_SOURCE_DIR "/tools/report.schema.json");
  REQUIRE(f);
  std::vector<std::string> errors;
  validate(report, json::parse(f), "$", errors);
  return errors;
}

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  Run r;
  FILE* p = popen((std::string(MULTICHEB_CLI) + " " + args + " 2>/dev/null").c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("parse_exponent") {
  CHECK(app::parse_exponent("2,2,1") == MultiIndex{2, 2, 1});
  CHECK(app::parse_exponent("0,4") == MultiIndex{0, 4});
  CHECK_THROWS_AS(app::parse_exponent(""), InvalidInput);
  CHECK_THROWS_AS(app::parse_exponent("2,x"), InvalidInput);
  CHECK_THROWS_AS(app::parse_exponent("2,-1"), InvalidInput);
  CHECK_THROWS_AS(app::parse_exponent("2.5"), InvalidInput);
}

TEST_CASE("compute rejects the zero exponent and unknown domains") {
  CHECK_THROWS_AS(app::compute(MultiIndex{0, 0, 0}, "ball"), InvalidInput);
  CHECK_THROWS_AS(app::compute(MultiIndex{1, 1}, "torus"), InvalidInput);
}

TEST_CASE("compute reduces zero exponents and sorts") {
  auto r = app::compute(MultiIndex{0, 1, 2}, "ball");
  CHECK(r.reduced);
  CHECK(r.k == MultiIndex{2, 1});
  CHECK(r.kept == std::vector<int>{1, 2});
  REQUIRE(r.report.has_value);
  CHECK(r.report.E_est == doctest::Approx(0.25).epsilon(1e-6));
  REQUIRE(r.known);
  CHECK(r.known->value == 0.25);
  REQUIRE(r.signature);
  CHECK(r.extremal->extremal);
  CHECK(r.equioscillation->passed);
  auto j = app::to_json(r);
  CHECK(schema_errors(j).empty());
  CHECK(j["schema"] == 1);
  CHECK(j["notes"].size() == 2);
}

TEST_CASE("report validates against the shipped schema") {
  auto r = app::compute(MultiIndex{1, 1, 1}, "simplex");
  auto j = app::to_json(r);
  auto errors = schema_errors(j);
  for (const auto& e : errors) MESSAGE(e);
  CHECK(errors.empty());
  CHECK(j["E_est"].get<double>() == doctest::Approx(1.0 / 72.0).epsilon(1e-6));
  REQUIRE(j.contains("signature"));
  CHECK(j["signature"]["rank_tol"] == 1e-6);
  CHECK(j["signature"]["min_ratio"].get<double>() > 1.0 - 1e-4);
  // A broken report is caught.
  j.erase("levels");
  j["domain"] = "torus";
  CHECK(schema_errors(j).size() == 2);
}

TEST_CASE("table rendering") {
  std::vector<app::TableEntry> entries;
  const double values[] = {1.924e-1, 8.578e-2, 4.016e-2, 3.630e-2, 1.923e-2, 1.652e-2, 1.388e-2};
  int i = 0;
  for (int n = 3; n <= 6; ++n)
    for (const auto& k : canonical_exponents(3, n)) entries.push_back({k, n, values[i++], true, true, n + 1});
  REQUIRE(entries.size() == 7);
  entries[6].certified = false;
  const auto csv = app::render_csv("ball", entries);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  CHECK(csv.find("ball,\"(2,2,2)\",6,1.3880000000e-02,0,7") != std::string::npos);
  const auto text = app::render_table("ball", entries);
  CHECK(text.find("n=3 (x10^-1)") != std::string::npos);
  CHECK(text.find("n=4 (x10^-2)") != std::string::npos);
  CHECK(text.find("n=6 (x10^-2)") != std::string::npos);
  CHECK(text.find("(4,1,1) 1.923") != std::string::npos);
  CHECK(text.find("(2,2,2) 1.388*") != std::string::npos);
}

TEST_CASE("hypercube table is exact") {
  auto entries = app::compute_table("hypercube", 2, 4, 2);
  REQUIRE(entries.size() == 4);  // (1,1) (2,1) (3,1) (2,2)
  for (const auto& e : entries) {
    CAPTURE(e.k.to_string());
    CHECK(e.certified);
    CHECK(e.value == doctest::Approx(std::ldexp(1.0, 2 - e.n)).epsilon(1e-6));
  }
}

TEST_CASE("verify names") {
  CHECK(app::verify("hypercube:2,2").passed());
  CHECK(app::verify("ball2d:4,1").passed());
  CHECK(app::verify("simplex2d:1,3").passed());
  CHECK_THROWS_AS(app::verify("hypercube:2,0"), InvalidInput);
  CHECK_THROWS_AS(app::verify("torus-1"), InvalidInput);
}

TEST_CASE("CLI exit codes") {
  CHECK(run_cli("compute --k 0,0,0 --domain ball").code == 3);
  CHECK(run_cli("compute --k 1,1 --domain torus").code == 3);
  CHECK(run_cli("compute --domain ball").code == 3);
  CHECK(run_cli("verify nothing").code == 3);
  CHECK(run_cli("closed-form --k 2,1 --domain ball --out /nonexistent/dir/x.json").code == 5);
  auto ok = run_cli("verify hypercube:3,2,1");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  auto cf = run_cli("closed-form --k 3,0,2 --domain simplex");
  REQUIRE(cf.code == 0);
  CHECK(json::parse(cf.out)["value"].get<double>() == std::ldexp(1.0, -9));
}

TEST_CASE("CLI compute output") {
  auto r = run_cli("compute --k 2,0,1 --domain ball");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(schema_errors(j).empty());
  CHECK(j["E_est"].get<double>() == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(j["reduced_k"] == json::array({2, 1}));
}

TEST_CASE("CLI SDPA export") {
  const std::string a = "/tmp/multicheb_test_a.dat-s", b = "/tmp/multicheb_test_b.dat-s";
  auto r = run_cli("export-sdpa --k 1,1,1 --domain ball --t 4 --out " + a);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("blocks 4") != std::string::npos);
  CHECK(run_cli("export-sdpa --k 1,1,1 --domain simplex --t 4 --out " + b).out.find("blocks 10") != std::string::npos);
  run_cli("export-sdpa --k 1,1,1 --domain simplex --t 4 --out " + a);
  std::ifstream fa(a), fb(b);
  std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(!sa.empty());
  CHECK(sa == sb);
  CHECK(run_cli("export-sdpa --k 1,1,1 --domain ball --out /nonexistent/dir/x").code == 5);
  std::remove(a.c_str());
  std::remove(b.c_str());
}

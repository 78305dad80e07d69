#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qem/cli.hpp"

using namespace qem;
using qem::cli::json;

namespace {

const char* kExpRadialCandidate = R"({
  "family": "exp-radial", "n": 3, "m": 4, "alpha": -1.0, "beta": 0.0,
  "c1": 1.0, "c2": 0.0
})";

json base_verify_config() {
  json cfg;
  cfg["command"] = "verify";
  cfg["candidate"] = json::parse(kExpRadialCandidate);
  return cfg;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// Runs through the report file so the test sees exactly what a user would.
std::pair<int, json> run_with_report(json cfg, const std::string& tag) {
  const std::filesystem::path out = temp_path("qem_test_" + tag + ".json");
  cfg["out"] = out.string();
  const int rc = qem::cli::run(qem::cli::parse_config_json(cfg));
  std::ifstream is(out);
  REQUIRE(is.good());
  json report = json::parse(is);
  std::filesystem::remove(out);
  return {rc, report};
}

int call_main(std::vector<std::string> args) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("qem"));
  for (auto& a : args) argv.push_back(a.data());
  return qem::cli::main_impl(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("parse_config fills the documented defaults") {
  const qem::cli::RunConfig cfg =
      qem::cli::parse_config_json(base_verify_config());
  CHECK(cfg.command == qem::cli::Command::verify);
  CHECK(cfg.grid.count == 200);
  CHECK(cfg.grid.seed == 42);
  CHECK(cfg.tolerance == 1e-9);
  CHECK_FALSE(cfg.tolerance_set);
  CHECK(cfg.fd_step == 1e-4);
  CHECK(cfg.ode_step == 1e-3);
}

TEST_CASE("parse_config rejects malformed input") {
  SUBCASE("unknown top-level key") {
    json cfg = base_verify_config();
    cfg["tolerence"] = 1e-6;
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("unknown nested key") {
    json cfg = base_verify_config();
    cfg["grid"] = {{"count", 10}, {"points", 10}};
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("unknown candidate key") {
    json cfg = base_verify_config();
    cfg["candidate"]["gamma"] = 2.0;
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("signature entry 0") {
    json cfg;
    cfg["command"] = "verify";
    cfg["candidate"] = {{"family", "translation"}, {"n", 3}, {"m", 2},
                        {"signature", {1, 0, 1}}, {"b_dir", {1, 0, 0}},
                        {"a", -1.0}};
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("m must be positive") {
    json cfg = base_verify_config();
    cfg["candidate"]["m"] = -1.0;
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("negative tolerance") {
    json cfg = base_verify_config();
    cfg["tolerance"] = -1e-9;
    CHECK_THROWS_AS(qem::cli::parse_config_json(cfg), qem::cli::ConfigError);
  }
  SUBCASE("invalid json text") {
    CHECK_THROWS_AS(qem::cli::parse_config("{"), qem::cli::ConfigError);
  }
}

TEST_CASE("profile_from_json covers the documented types") {
  const json exp = {{"type", "exp-affine"}, {"alpha", -1.0}, {"beta", 0.5}};
  const ScalarProfile p = qem::cli::profile_from_json(exp);
  CHECK(p(0.3) == doctest::Approx(std::exp(-0.3 + 0.5)));
  CHECK(p.d1(0.3) == doctest::Approx(-std::exp(0.2)));
  const json trig = {{"type", "trig-log"}, {"c1", 0.0}, {"c2", 1.0},
                     {"mu", 0.5}, {"domain", {1.0, 9.0}}};
  const ScalarProfile q = qem::cli::profile_from_json(trig);
  CHECK(q(4.0) == doctest::Approx(std::cos(0.5 * std::log(4.0))));
  CHECK(q.domain().hi == 9.0);
  CHECK_THROWS_AS(qem::cli::profile_from_json({{"type", "poly"}}),
                  qem::cli::ConfigError);
}

TEST_CASE("explicit candidate with lambda from-reduction") {
  json cand;
  cand["n"] = 3;
  cand["m"] = 4;
  cand["signature"] = {1, 1, 1};
  cand["invariant"] = {{"kind", "quadratic"}, {"a", 1.0}};
  cand["phi"] = {{"type", "exp-affine"}, {"alpha", -1.0}};
  const double r1 = 1.0 + std::sqrt(5.0) / 2.0;
  cand["h"] = {{"type", "exp-sum"}, {"c1", 1.0}, {"r1", r1}, {"c2", 0.0}, {"r2", 0.0}};
  cand["lambda"] = {{"type", "from-reduction"}};
  const SolutionCandidate c = qem::cli::candidate_from_json(cand);
  for (double xi : {0.1, 0.5, 1.2})
    CHECK(c.lambda(xi) ==
          doctest::Approx(compute_lambda(3, 4.0, 1.0, 0.0, c.phi, c.h, xi))
              .epsilon(1e-12));
}

TEST_CASE("generate on the exp-radial family passes at 1e-9") {
  json cfg = base_verify_config();
  cfg["command"] = "generate";
  const auto [rc, report] = run_with_report(cfg, "generate");
  CHECK(rc == 0);
  CHECK(report["status"] == "ok");
  CHECK(report["max_residual"].get<double>() <= 1e-9);
  CHECK(report["lambda_trace_max"].get<double>() <= 1e-9);
  CHECK(report["grid"]["count"] == 200);
}

TEST_CASE("verify flags a lambda offset as a tolerance breach") {
  json cfg = base_verify_config();
  cfg["candidate"]["lambda_offset"] = 0.1;
  const auto [rc, report] = run_with_report(cfg, "offset");
  CHECK(rc == 1);
  CHECK(report["status"] == "tolerance_breach");
  CHECK(report["max_residual"].get<double>() > 1e-3);
}

TEST_CASE("reports are deterministic for a fixed config and seed") {
  json cfg = base_verify_config();
  auto [rc1, rep1] = run_with_report(cfg, "det1");
  auto [rc2, rep2] = run_with_report(cfg, "det2");
  CHECK(rc1 == rc2);
  rep1.erase("timestamp");
  rep2.erase("timestamp");
  CHECK(rep1.dump() == rep2.dump());
  json seeded = cfg;
  seeded["grid"] = {{"seed", 43}};
  auto [rc3, rep3] = run_with_report(seeded, "det3");
  (void)rc3;
  rep3.erase("timestamp");
  CHECK(rep1["max_residual"].dump() != rep3["max_residual"].dump());
}

TEST_CASE("csv export carries coordinates, profiles and residual columns") {
  json cfg = base_verify_config();
  cfg["grid"] = {{"count", 7}};
  const std::filesystem::path csv = temp_path("qem_test_out.csv");
  cfg["csv_out"] = csv.string();
  const auto [rc, report] = run_with_report(cfg, "csv");
  CHECK(rc == 0);
  (void)report;
  std::ifstream is(csv);
  REQUIRE(is.good());
  std::string header;
  std::getline(is, header);
  CHECK(header.rfind("x1,x2,x3,xi,phi,h,lambda", 0) == 0);
  CHECK(header.find("qem_0_0") != std::string::npos);
  CHECK(header.find("edp_2_2") != std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 7);
  std::filesystem::remove(csv);
}

TEST_CASE("ode command integrates and reports samples") {
  json cfg;
  cfg["command"] = "ode";
  cfg["ode"] = {{"n", 3}, {"m", 4},
                {"phi", {{"type", "exp-affine"}, {"alpha", -1.0}}},
                {"interval", {0.0, 2.0}},
                {"h0", 1.0}, {"hp0", 1.0 + std::sqrt(5.0) / 2.0}};
  const auto [rc, report] = run_with_report(cfg, "ode");
  CHECK(rc == 0);
  CHECK(report["status"] == "ok");
  REQUIRE(report["samples"].size() == 41);
  const double r1 = 1.0 + std::sqrt(5.0) / 2.0;
  const json& last = report["samples"].back();
  CHECK(last["xi"].get<double>() == doctest::Approx(2.0));
  CHECK(last["h"].get<double>() ==
        doctest::Approx(std::exp(2.0 * r1)).epsilon(1e-6));
}

TEST_CASE("ode command surfaces a too-coarse step as exit 1") {
  json cfg;
  cfg["command"] = "ode";
  cfg["ode"] = {{"n", 3}, {"m", 1},
                {"phi", {{"type", "exp-affine"}, {"alpha", -10.0}}},
                {"interval", {0.0, 4.0}},
                {"h0", 1.0}, {"hp0", 0.0}, {"step", 0.5}};
  const auto [rc, report] = run_with_report(cfg, "ode_coarse");
  CHECK(rc == 1);
  CHECK(report["status"] == "step_too_coarse");
}

TEST_CASE("fluid command on an m = 1 family") {
  json cfg;
  cfg["command"] = "fluid";
  cfg["candidate"] = {{"family", "sqrt-radial"}, {"n", 3}, {"m", 1},
                      {"c1", 0.0}, {"c2", 1.0}, {"interval", {1.0, 4.0}}};
  cfg["grid"] = {{"count", 25}};
  cfg["tolerance"] = 1e-8;
  const auto [rc, report] = run_with_report(cfg, "fluid");
  CHECK(rc == 0);
  CHECK(report["status"] == "ok");
  CHECK(report["samples"].size() == 25);
}

TEST_CASE("oracle command cross-checks the closed-form Ricci") {
  json cfg = base_verify_config();
  cfg["command"] = "oracle";
  cfg["grid"] = {{"count", 20}};
  const auto [rc, report] = run_with_report(cfg, "oracle");
  CHECK(rc == 0);
  CHECK(report["status"] == "ok");
  CHECK(report["tolerance"].get<double>() == 1e-5);
  CHECK(report["max_entry_diff"].get<double>() <= 1e-5);
}

TEST_CASE("witness command certifies the printed obstruction bound") {
  json cfg;
  cfg["command"] = "witness";
  cfg["witness"] = {{"n", 4}, {"m", 2},
                    {"phi", {{"type", "exp-affine"}, {"alpha", -1.0}}},
                    {"interval", {0.0, 1.0}}};
  const auto [rc, report] = run_with_report(cfg, "witness");
  CHECK(rc == 0);
  CHECK(report["status"] == "ok");
  CHECK(report["min_abs_obstruction"].get<double>() >=
        4.0 * std::exp(-1.0) - 1e-9);
}

TEST_CASE("main_impl wires subcommands, overrides and exit codes") {
  const std::filesystem::path cfg_path = temp_path("qem_test_cfg.json");
  {
    json cfg = base_verify_config();
    std::ofstream os(cfg_path);
    os << cfg.dump(2);
  }
  const std::filesystem::path out = temp_path("qem_test_main.json");

  SUBCASE("happy path with overrides") {
    const int rc = call_main({"verify", "--config", cfg_path.string(), "--out",
                              out.string(), "--grid", "50", "--seed", "7"});
    CHECK(rc == 0);
    std::ifstream is(out);
    REQUIRE(is.good());
    const json report = json::parse(is);
    CHECK(report["grid"]["count"] == 50);
    CHECK(report["grid"]["seed"] == 7);
    std::filesystem::remove(out);
  }
  SUBCASE("subcommand must match the config command") {
    CHECK(call_main({"witness", "--config", cfg_path.string()}) == 2);
  }
  SUBCASE("missing config file") {
    CHECK(call_main({"verify", "--config", "/nonexistent/qem.json"}) == 2);
  }
  SUBCASE("tolerance override can force a breach") {
    const int rc = call_main({"verify", "--config", cfg_path.string(), "--out",
                              out.string(), "--tol", "1e-18"});
    CHECK(rc == 1);
    std::filesystem::remove(out);
  }
  std::filesystem::remove(cfg_path);
}

#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qem/fluid.hpp"
#include "qem/reduction.hpp"

namespace qem::cli {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { generate, verify, ode, fluid, oracle, witness };

struct GridConfig {
  std::size_t count = 200;
  std::uint64_t seed = 42;
  std::optional<Box> box;
};

struct RunConfig {
  Command command = Command::verify;
  json candidate;  // family or explicit block; empty for ode/witness
  json ode;        // ode problem block
  json witness;    // witness block
  GridConfig grid;
  double tolerance = 1e-9;
  bool tolerance_set = false;  // explicit override (oracle defaults differ)
  double fd_step = 1e-4;
  double ode_step = 1e-3;
  bool flat_laplacian = false;
  std::string out_path;
  std::string csv_path;
};

/// Parses and validates a JSON configuration. Unknown keys anywhere are hard
/// errors; defaults: step 1e-3, grid count 200, seed 42, tolerance 1e-9.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_json(const json& doc);

/// Profile description -> evaluator. Types: constant, exp-affine, exp-sum,
/// sqrt, log-sum, trig-log; optional "domain": [lo, hi].
ScalarProfile profile_from_json(const json& j);

/// Candidate block -> SolutionCandidate (family or explicit form).
SolutionCandidate candidate_from_json(const json& j);

/// Executes the command and writes the report. Exit status: 0 ok,
/// 1 tolerance breach, 2 invalid input.
int run(const RunConfig& config);

/// Entry point used by the binary; parses argv, loads the config, runs.
int main_impl(int argc, char** argv);

}  // namespace qem::cli

#pragma once

// Named experiments driven by a YAML config: each writes <out>/<experiment>.csv and
// <out>/<experiment>.json and returns an exit status.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmem/analysis.hpp"

namespace qmem {

enum ExitStatus : int {
  exit_ok = 0,
  exit_config = 2,
  exit_assertion = 3,
  exit_resource = 4,
};

struct RunRequest {
  std::string experiment;
  std::string config_text;              // YAML document
  std::optional<std::uint64_t> seed;    // overrides `seed` in the config
  std::optional<Engine> engine;         // overrides `engine` in the config
  std::string out_dir = ".";
};

struct AssertionResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  int status = exit_ok;
  std::string error;                    // set for config and resource failures
  std::vector<AssertionResult> assertions;
  std::string csv_path;
  std::string json_path;
};

std::vector<std::string> experiment_names();

/// Never throws; library errors map onto the exit-status contract.
RunReport run_experiment(const RunRequest& request);

std::string software_version();

}  // namespace qmem

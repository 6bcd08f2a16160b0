#pragma once

#include <optional>

#include "seqrpf/config.hpp"

namespace seqrpf {

struct RunRequest {
  std::string kind;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int jobs = 0;        // 0 = one thread per core
  bool plots = true;
};

struct RunResult {
  std::vector<std::string> outputs;  // file names inside out_dir
  std::vector<std::string> warnings;
};

const std::vector<std::string>& known_kinds();

// loads the config, runs one experiment kind, writes tables, a summary, plots
// and a manifest into out_dir; throws Error(config_error) for request or
// config problems and other Error codes for computation failures
RunResult run_experiment(const RunRequest& req);

}  // namespace seqrpf

#include <CLI11.hpp>
#include <cstdio>

#include "seqrpf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sequential transfer-operator experiments"};
  app.set_version_flag("--version", seqrpf::kVersion);

  seqrpf::RunRequest req;
  std::string kind_help;
  for (const auto& k : seqrpf::known_kinds()) kind_help += (kind_help.empty() ? "" : "|") + k;

  app.add_option("kind", req.kind, "experiment kind (" + kind_help + ")")->required();
  app.add_option("--config", req.config_path, "JSON experiment description")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", req.out_dir, "output directory (default: current)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--jobs", req.jobs, "worker threads, 0 = one per core")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) req.seed_override = seed;

  try {
    const seqrpf::RunResult res = seqrpf::run_experiment(req);
    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& name : res.outputs) std::printf("%s\n", name.c_str());
    return 0;
  } catch (const seqrpf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == seqrpf::Errc::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

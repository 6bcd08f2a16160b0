#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqrpf/config.hpp"
#include "seqrpf/runner.hpp"

using namespace seqrpf;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "seqrpf_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream f(p);
  f << content;
  REQUIRE(f.good());
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CliResult {
  int rc = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int invocation = 0;
  const fs::path out = work_dir() / ("stdout." + std::to_string(invocation));
  const fs::path err = work_dir() / ("stderr." + std::to_string(invocation));
  ++invocation;
  const std::string cmd = std::string("\"") + SEQRPF_BIN + "\" " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult res;
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  res.rc = WEXITSTATUS(status);
  res.out = read_text(out);
  res.err = read_text(err);
  return res;
}

fs::path golden_llt_config() {
  const fs::path p = work_dir() / "gm_llt.json";
  write_text(p, R"({
    "system": {"type": "sft", "preset": "golden-mean", "window_len": 8,
               "observable": {"type": "symbol-linear", "scale": 1.0}},
    "params": {"n_list": [128, 256]},
    "seed": 3
  })");
  return p;
}

}  // namespace

TEST_CASE("version flag prints the release number") {
  const CliResult r = run_cli("--version");
  CHECK(r.rc == 0);
  CHECK(r.out.find(kVersion) != std::string::npos);
}

TEST_CASE("a full run emits tables, summary, and manifest") {
  const fs::path cfg = golden_llt_config();
  const fs::path out = work_dir() / "llt_run";
  const CliResult r = run_cli("llt --config " + cfg.string() + " --out " + out.string());
  CHECK(r.rc == 0);
  CHECK(r.err.empty());
  CHECK(fs::exists(out / "llt.csv"));
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(r.out.find("llt.csv") != std::string::npos);

  const json manifest = json::parse(read_text(out / "manifest.json"));
  CHECK(manifest.at("kind") == "llt");
  CHECK(manifest.at("version") == kVersion);
  CHECK(manifest.at("seed") == 3);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(manifest.at("outputs").is_array());
  CHECK(manifest.contains("started_at"));
  CHECK(manifest.contains("finished_at"));

  const json summary = json::parse(read_text(out / "summary.json"));
  CHECK(summary.at("decreasing").get<bool>());
  CHECK(summary.at("span").get<double>() == 1.0);
}

TEST_CASE("identical requests produce byte-identical tables") {
  const fs::path cfg = golden_llt_config();
  const fs::path a = work_dir() / "rerun_a";
  const fs::path b = work_dir() / "rerun_b";
  CHECK(run_cli("llt --config " + cfg.string() + " --out " + a.string()).rc == 0);
  CHECK(run_cli("llt --config " + cfg.string() + " --out " + b.string()).rc == 0);
  CHECK(read_text(a / "llt.csv") == read_text(b / "llt.csv"));
  CHECK(read_text(a / "summary.json") == read_text(b / "summary.json"));
  const json ma = json::parse(read_text(a / "manifest.json"));
  const json mb = json::parse(read_text(b / "manifest.json"));
  CHECK(ma.at("config_hash") == mb.at("config_hash"));
}

TEST_CASE("seed overrides land in the manifest") {
  const fs::path cfg = golden_llt_config();
  const fs::path out = work_dir() / "seed_override";
  const CliResult r =
      run_cli("llt --config " + cfg.string() + " --out " + out.string() + " --seed 42");
  CHECK(r.rc == 0);
  const json manifest = json::parse(read_text(out / "manifest.json"));
  CHECK(manifest.at("seed") == 42);
}

TEST_CASE("configuration mistakes exit with code two") {
  const fs::path bad = work_dir() / "bad_params.json";
  write_text(bad, R"({
    "system": {"type": "sft", "preset": "golden-mean"},
    "params": {"bogus": 1}
  })");
  const CliResult r = run_cli("llt --config " + bad.string());
  CHECK(r.rc == 2);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("unknown kinds exit with code two and list the menu") {
  const fs::path cfg = golden_llt_config();
  const CliResult r = run_cli("frobnicate --config " + cfg.string());
  CHECK(r.rc == 2);
  CHECK(r.err.find("rpf") != std::string::npos);
  CHECK(r.err.find("env-pressure") != std::string::npos);
}

TEST_CASE("analysis failures exit with code one") {
  const fs::path cfg = work_dir() / "non_lattice.json";
  write_text(cfg, R"({
    "system": {"type": "sft", "preset": "full-shift", "window_len": 4,
               "observable": {"type": "values", "data": [1.0, 2.414213562373095]}},
    "params": {"n_list": [64]}
  })");
  const CliResult r = run_cli("llt --config " + cfg.string());
  CHECK(r.rc == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("lattice") != std::string::npos);
}

TEST_CASE("the runner api reports outputs and a convergence summary") {
  const fs::path cfg = work_dir() / "gm_rpf.json";
  write_text(cfg, R"({
    "system": {"type": "sft", "preset": "golden-mean", "window_len": 8,
               "observable": {"type": "symbol-linear", "scale": 1.0}}
  })");
  const fs::path out = work_dir() / "api_rpf";
  RunRequest req;
  req.kind = "rpf";
  req.config_path = cfg.string();
  req.out_dir = out.string();
  const RunResult res = run_experiment(req);

  const auto has = [&](const std::string& name) {
    for (const std::string& o : res.outputs)
      if (o.find(name) != std::string::npos) return true;
    return false;
  };
  CHECK(has("triplets.csv"));
  CHECK(has("convergence.csv"));
  CHECK(has("residual-decay.svg"));
  // output names are relative to the requested directory
  for (const std::string& o : res.outputs) CHECK(fs::exists(out / o));

  const json summary = json::parse(read_text(out / "summary.json"));
  const double rate = summary.at("rate_estimate").get<double>();
  CHECK(rate == doctest::Approx(0.381966).epsilon(0.05));
}

TEST_CASE("missing marked cycles downgrade to a warning") {
  const fs::path cfg = work_dir() / "env_nomark.json";
  write_text(cfg, R"({
    "system": {"type": "environment",
               "layers": [
                 {"transition": [[1, 1], [1, 1]],
                  "potential": [-0.693147180559945, -0.693147180559945],
                  "observable": [0.0, 1.0]},
                 {"transition": [[1, 1], [1, 1]],
                  "potential": [0.3, -0.4],
                  "observable": [0.0, 1.0]}],
               "driver": {"type": "independent", "probs": [0.5, 0.5]},
               "window_len": 16},
    "params": {"gaps": [1, 2, 3]}
  })");
  const fs::path out = work_dir() / "env_nomark_run";
  RunRequest req;
  req.kind = "env-mixing";
  req.config_path = cfg.string();
  req.out_dir = out.string();
  const RunResult res = run_experiment(req);
  CHECK(fs::exists(out / "phi.csv"));
  CHECK(!fs::exists(out / "block-growth.csv"));
  bool warned = false;
  for (const std::string& w : res.warnings) warned = warned || w.find("marked") != std::string::npos;
  CHECK(warned);
}

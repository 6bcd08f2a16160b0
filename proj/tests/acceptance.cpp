// End-to-end acceptance checks. Each check prints one PASS/FAIL line with
// the measured quantity that decided it; the process exits nonzero if any
// check fails. Scales are chosen so the whole binary stays under a couple
// of minutes on a laptop.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "seqrpf/env.hpp"

using namespace seqrpf;
namespace fs = std::filesystem;

namespace {

SolveOptions quiet() {
  SolveOptions o;
  o.enforce = false;
  return o;
}

GibbsFamily coin_gibbs(int window) {
  SftSpec sp = make_full_shift(2, window);
  for (auto& f : sp.potentials) f.setConstant(-std::log(2.0));
  for (auto& u : sp.observables) u = Eigen::Vector2d(0, 1);
  return build_gibbs(sp, quiet());
}

GibbsFamily golden_gibbs(int window) {
  SftSpec sp = make_golden_mean(window);
  for (auto& u : sp.observables) u = Eigen::Vector2d(0, 1);
  return build_gibbs(sp, quiet());
}

SftSpec seeded_spec(int i) {
  return make_seeded_primitive(2 + i % 2, 16, 0.25, 1.0, 100 + i);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool ok = false;
  std::string detail;
};

// ---- 1: generating functions against cylinder enumeration -------------------

Outcome check_generating_function() {
  const cplx zs[8] = {{0.30, 0},     {-0.45, 0},    {0, 0.50},     {0, -0.35},
                      {0.25, 0.25},  {-0.30, 0.20}, {0.40, -0.10}, {-0.15, -0.30}};
  double worst = 0;
  for (int i = 0; i < 25; ++i) {
    const GibbsFamily g = build_gibbs(seeded_spec(i), quiet());
    const int n = 4 + i % 7;
    const long j = i % 4;
    for (const cplx& z : zs) {
      const cplx want = oracle::brute_mgf(g, j, n, z);
      const double rel = std::abs(exact_mgf(g, j, n, z) - want) / std::abs(want);
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-10, "25 specs, worst rel " + fmt("%.2e", worst)};
}

// ---- 2: fixed-point residuals and the contraction rate ----------------------

Outcome check_fixed_point() {
  SolveOptions o = quiet();
  o.n = 60;
  double worst = 0;
  for (int i = 0; i < 25; ++i) {
    const SftSpec sp = seeded_spec(i);
    const SftFamily fam(sp);
    for (int s = 0; s < sp.window(); ++s)
      for (const cplx z : {cplx(0, 0), cplx(0, 0.3)}) {
        const RpfTriplet t = solve_triplet(fam, s, z, o);
        worst = std::max({worst, t.eigen_residual, t.dual_residual});
      }
  }
  if (worst > 1e-9) return {false, "residual " + fmt("%.2e", worst)};

  const SftSpec gm = make_golden_mean(12);
  const SftFamily fam(gm);
  std::vector<int> horizons;
  for (int h = 4; h <= 36; h += 4) horizons.push_back(h);
  const std::vector<Eigen::VectorXcd> tests = {Eigen::VectorXcd::Ones(2),
                                               Eigen::VectorXcd::Unit(2, 0)};
  const ConvergenceFit fit = convergence_rate_fit(fam, 0, cplx(0, 0), horizons, tests, quiet());
  const double delta = std::exp(fit.fit.slope);
  const double want = 1 / (oracle::phi() * oracle::phi());
  const bool ok = fit.fit.slope < -0.01 && std::abs(delta - want) / want <= 0.05;
  return {ok, "residual " + fmt("%.2e", worst) + ", rate " + fmt("%.4f", delta) +
                  " vs " + fmt("%.4f", want)};
}

// ---- 3: supplied measure families stay fixed ---------------------------------

Outcome check_invariant_measures() {
  const SftSpec gm = make_golden_mean(6);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    std::vector<Eigen::VectorXd> m_family;
    Rng rng(derive_stream(17, i));
    for (int s = 0; s < gm.window(); ++s) {
      Eigen::VectorXd m(2);
      m << 0.5 + 0.4 * rng.uniform(), 0.1 + 0.3 * rng.uniform();
      m /= m.sum();
      m_family.push_back(m);
    }
    const NonsingularReport rep = nonsingular_check(gm, m_family, quiet());
    worst = std::max({worst, rep.max_lambda_gap, rep.max_nu_gap});
  }
  return {worst <= 1e-10, "10 families, worst gap " + fmt("%.2e", worst)};
}

// ---- 4: perturbation responses shrink with the noise -------------------------

Outcome check_stability() {
  // a full shift would be degenerate here: its leading direction is exactly
  // constant whatever the potential does, so use a sparser 3-state topology
  SftSpec circulant = make_full_shift(3, 6);
  for (auto& t : circulant.transitions)
    t = (Eigen::MatrixXi(3, 3) << 1, 1, 0, 0, 1, 1, 1, 0, 1).finished();
  double worst_ratio = 1e30;
  for (const SftSpec& sp : {make_golden_mean(6), circulant}) {
    const std::vector<StabilityRow> rows =
        stability_sweep(sp, {1e-1, 1e-2, 1e-3}, trust_radius(sp) / 2, 11, quiet());
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      worst_ratio = std::min(worst_ratio, rows[i].dlambda / rows[i + 1].dlambda);
      worst_ratio = std::min(worst_ratio, rows[i].dh / rows[i + 1].dh);
      worst_ratio = std::min(worst_ratio, rows[i].dnu / rows[i + 1].dnu);
    }
  }
  return {worst_ratio >= 5.0, "weakest decade ratio " + fmt("%.1f", worst_ratio) + "x"};
}

// ---- 5: variance dichotomy ----------------------------------------------------

Outcome check_variance_dichotomy() {
  // a pair-difference observable pushed through the block recode must be
  // recognized: bounded variance and a recovered witness
  SftSpec base = make_golden_mean(4);
  base.memory = 2;
  const Eigen::Vector2d w(0.7, -0.3);
  for (int s = 0; s < base.window(); ++s) {
    base.potentials[s] = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd u(4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) u(a * 2 + b) = w(b) - w(a);
    base.observables[s] = u;
  }
  const GibbsFamily gb = build_gibbs(recode_to_memory_one(base), quiet());
  const CoboundaryWitness wit = coboundary_solve(gb, 40);
  const VarianceGrowth bounded = variance_growth(gb, 0, {16, 64, 256, 512});
  if (wit.residual > 1e-8 || wit.tail_estimate > 1e-8)
    return {false, "recovery residual " + fmt("%.2e", wit.residual)};
  if (bounded.cls != VarianceClass::bounded || bounded.sup_variance > 4.0)
    return {false, "sup variance " + fmt("%.3f", bounded.sup_variance)};

  const VarianceGrowth coin = variance_growth(coin_gibbs(4), 0, {64, 128, 256, 512});
  const double coin_gap = std::abs(coin.rate - 0.25);
  if (coin.cls != VarianceClass::linear || coin_gap > 1e-10)
    return {false, "coin rate gap " + fmt("%.2e", coin_gap)};

  // small potential perturbations around the reference system must keep the
  // growth rate away from zero
  double inf_rate = 1e30;
  for (int i = 0; i < 10; ++i) {
    SftSpec sp = make_golden_mean(8);
    for (auto& u : sp.observables) u = Eigen::Vector2d(0, 1);
    randomize_potentials(sp, -0.1, 0.1, 900 + i);
    const VarianceGrowth vg = variance_growth(build_gibbs(sp, quiet()), 0, {64, 128, 256, 512});
    if (vg.cls != VarianceClass::linear) return {false, "ball spec not linear"};
    inf_rate = std::min(inf_rate, vg.rate);
  }
  if (inf_rate < 0.01) return {false, "ball rate floor " + fmt("%.4f", inf_rate)};
  return {true, "sup " + fmt("%.3f", bounded.sup_variance) + ", coin gap " +
                    fmt("%.1e", coin_gap) + ", ball floor " + fmt("%.3f", inf_rate)};
}

// ---- 6: centered moments track pressure derivatives ---------------------------

Outcome check_moment_asymptotics() {
  if (moment_constant_even(2) != 1.0 || moment_constant_even(4) != 3.0 ||
      moment_constant_odd(3) != 1.0)
    return {false, "closed-form constants"};
  double worst_gap = 0;
  for (int i = 0; i < 5; ++i) {
    const GibbsFamily g = build_gibbs(make_seeded_primitive(2 + i % 2, 16, 0.25, 1.0, 300 + i),
                                      quiet());
    const MomentReport rep =
        moments_report(g, 0, {64, 128, 256, 512, 1024, 2048, 4096}, 4, quiet());
    worst_gap = std::max(worst_gap, std::abs(rep.gap_fit[4].slope + 1.0));
  }
  return {worst_gap <= 0.25, "5 specs, worst |slope+1| " + fmt("%.3f", worst_gap)};
}

// ---- 7: normal approximation error stays root-n --------------------------------

Outcome check_normal_approximation() {
  double worst_band = 0;
  const auto examine = [&](const GibbsFamily& g) -> std::string {
    const CltReport rep = berry_esseen_report(g, 0, {64, 256, 1024, 4096});
    if (rep.degenerate || rep.sampled) return "not exact";
    worst_band = std::max(worst_band, rep.band_ratio);
    for (std::size_t i = 0; i < rep.dn.size(); ++i)
      if (rep.esseen[i] < rep.dn[i]) return "certified bound crossed";
    return "";
  };
  std::string err = examine(coin_gibbs(4));
  if (!err.empty()) return {false, "coin: " + err};
  for (int i = 0; i < 3; ++i) {
    SftSpec sp = make_seeded_primitive(2 + i % 2, 16, 0.25, 1.0, 400 + i);
    // integer observables keep the distribution on a lattice, so the
    // Kolmogorov distance is exact rather than sampled
    randomize_observables(sp, 0.0, 3.0, 500 + i);
    for (auto& u : sp.observables) u = u.array().round();
    const GibbsFamily g = build_gibbs(sp, quiet());
    if (variance_growth(g, 0, {64, 128, 256}).cls != VarianceClass::linear)
      return {false, "seed spec variance not linear"};
    err = examine(g);
    if (!err.empty()) return {false, "seeded: " + err};
  }
  return {worst_band <= 4.0, "4 specs, worst band " + fmt("%.2f", worst_band)};
}

// ---- 8: local gaussian asymptotics on the lattice ------------------------------

Outcome check_local_limit() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<int> ns = {128, 256, 512, 1024, 2048, 4096, 8192};
  for (const bool coin : {true, false}) {
    const LltReport rep = llt_report(coin ? coin_gibbs(4) : golden_gibbs(4), 0, ns);
    for (std::size_t i = 0; i + 1 < rep.gap.size(); ++i)
      if (rep.gap[i + 1] > 1.1 * rep.gap[i])
        return {false, std::string(coin ? "coin" : "golden") + " gap grew at n=" +
                           std::to_string(rep.n_list[i + 1])};
  }
  // at the independent fair point the whole distribution is binomial
  const ExactDistribution d = exact_distribution(coin_gibbs(4), 0, 4096);
  double worst = 0;
  for (std::size_t i = 0; i < d.prob.size(); ++i) {
    const double k = d.value(i);
    if (std::abs(k - 2048.0) > 6 * d.sigma) continue;
    const double want = std::exp(std::lgamma(4097.0) - std::lgamma(k + 1.0) -
                                 std::lgamma(4097.0 - k) - 4096 * std::log(2.0));
    worst = std::max(worst, std::abs(d.prob[i] - want) / want);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = worst <= 1e-6 && secs <= 300;
  return {ok, "binomial rel " + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + "s"};
}

// ---- 9: marked-block counting in a random environment ---------------------------

EnvLayer coin_layer() {
  EnvLayer l;
  l.transition = Eigen::MatrixXi::Ones(2, 2);
  l.potential = Eigen::Vector2d(-std::log(2.0), -std::log(2.0));
  l.observable = Eigen::Vector2d(0, 1);
  return l;
}

Outcome check_block_counting() {
  EnvSpec env;
  env.layers = {coin_layer(), coin_layer()};
  env.layers[1].potential = Eigen::Vector2d(0.9, -1.1);
  env.driver.kind = DriverKind::markov;
  env.driver.initial = Eigen::Vector2d(1, 0);
  env.driver.kernels = {(Eigen::MatrixXd(2, 2) << 0.7, 0.3, 0.4, 0.6).finished()};
  env.marked = {0};
  env.window_len = 64;
  validate(env);
  const EnvLltReport rep =
      env_llt_pipeline(env, 17, 0.5, 3.0, 6, 1, 0.5,
                       {256, 512, 1024, 2048, 4096, 8192, 16384}, {128, 256, 512}, quiet());
  double prev = -1;
  for (std::size_t i = 0; i < rep.blocks.n_list.size(); ++i) {
    const double r = rep.blocks.counts[i] / std::log(static_cast<double>(rep.blocks.n_list[i]));
    if (r <= prev) return {false, "count per log-n fell at n=" + std::to_string(rep.blocks.n_list[i])};
    prev = r;
  }
  if (!rep.blocks.ratio_increasing || rep.blocks.rho_max >= 1.0)
    return {false, "loop radius " + fmt("%.4f", rep.blocks.rho_max)};

  // a marked layer the driver can never occupy must be flagged, not counted
  EnvSpec control = env;
  control.driver.kernels = {Eigen::MatrixXd::Identity(2, 2)};
  control.marked = {1};
  validate(control);
  const PropGrowthReport growth = propgrowth_report(control, 1, {64, 128, 256});
  if (growth.compliant) return {false, "unreachable mark not flagged"};
  return {true, "count " + std::to_string(rep.blocks.counts.back()) + " at n=16384, loop radius " +
                    fmt("%.4f", rep.blocks.rho_max)};
}

// ---- 10: exponential concentration from martingale bounds ------------------------

Outcome check_concentration() {
  for (const bool coin : {true, false}) {
    const GibbsFamily g = coin ? coin_gibbs(4) : golden_gibbs(4);
    for (const int n : {64, 256, 1024}) {
      const ConcentrationReport rep = concentration_report(g, n, 50);
      if (rep.violations != 0)
        return {false, std::string(coin ? "coin" : "golden") + " crossed at n=" + std::to_string(n)};
    }
  }
  const GibbsFamily g = golden_gibbs(4);
  const double defect = martingale_enumeration_defect(g, martingale_decompose(g, 8));
  return {defect <= 1e-12, "0 violations over 300 tail points, defect " + fmt("%.1e", defect)};
}

// ---- 11: cumulant growth stays linear ---------------------------------------------

Outcome check_cumulant_growth() {
  std::vector<std::pair<std::string, SftSpec>> specs;
  {
    SftSpec fs = make_full_shift(2, 4);
    for (auto& f : fs.potentials) f.setConstant(-std::log(2.0));
    for (auto& u : fs.observables) u = Eigen::Vector2d(0, 1);
    specs.emplace_back("coin", fs);
  }
  {
    SftSpec gm = make_golden_mean(4);
    for (auto& f : gm.potentials) f = Eigen::Vector2d(0.3, -0.2);
    for (auto& u : gm.observables) u = Eigen::Vector2d(0, 1);
    specs.emplace_back("golden", gm);
  }
  {
    SftSpec sp = make_seeded_primitive(3, 4, 0.3, 1.0, 7);
    for (std::size_t s = 1; s < sp.potentials.size(); ++s) {
      sp.transitions[s] = sp.transitions[0];
      sp.potentials[s] = sp.potentials[0];
      sp.observables[s] = sp.observables[0];
    }
    specs.emplace_back("seeded", sp);
  }
  double worst = 0;
  for (const auto& [name, sp] : specs) {
    const GibbsFamily g = build_gibbs(sp, quiet());
    const CumulantReport rep = cumulant_report(g, 0, {256, 512, 1024, 2048, 4096}, 6, 0.1, 1024);
    for (int k = 1; k <= 6; ++k) {
      if (rep.variation[k] > 0.10)
        return {false, name + " order " + std::to_string(k) + " varied " +
                           fmt("%.3f", rep.variation[k])};
      worst = std::max(worst, rep.variation[k]);
    }
    if (name == "coin")
      for (std::size_t i = 0; i < rep.n_list.size(); ++i)
        if (std::abs(rep.per_n[2][i] - 0.25) > 1e-8 || std::abs(rep.per_n[4][i] + 0.125) > 1e-8)
          return {false, "coin rates off the closed form"};
  }
  return {true, "3 specs, worst variation " + fmt("%.3f", worst)};
}

// ---- 12: rate function duality and tail probes -------------------------------------

Outcome check_large_deviations() {
  LdpOptions o;
  o.t_points = 21;
  o.n_list = {256, 512, 1024, 2048, 4096, 8192, 16384};
  o.solve = quiet();
  const LdpReport rep = ldp_report(coin_gibbs(4), o);
  double worst = 0;
  for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
    worst = std::max(worst, std::abs(rep.rate[i] - oracle::coin_rate(rep.t_grid[i])));
  if (worst > 1e-8) return {false, "rate gap " + fmt("%.2e", worst)};
  if (rep.duality_gap > 1e-8) return {false, "duality gap " + fmt("%.2e", rep.duality_gap)};
  if (!rep.local_decreasing) return {false, "interval probe gap not decreasing"};
  if (!rep.md_decreasing) return {false, "scaled tail gap not decreasing"};
  return {true, "21 points, rate gap " + fmt("%.2e", worst) + ", duality " +
                    fmt("%.2e", rep.duality_gap)};
}

// ---- 13: dependence coefficients and cylinder ratios --------------------------------

Outcome check_mixing() {
  SftSpec fs = make_full_shift(2, 6);
  randomize_potentials(fs, -0.5, 0.5, 7);
  const MixingReport free = psi_mixing_report(build_gibbs(fs, quiet()), 3, {1, 2, 3});
  for (double v : free.psi)
    if (v > 1e-13) return {false, "full shift dependence " + fmt("%.2e", v)};

  const GibbsFamily g = golden_gibbs(6);
  const MixingReport rep = psi_mixing_report(g, 2, {1, 2, 3});
  double worst = 0;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i) {
    double brute = 0;
    for (int s = 0; s < g.window(); ++s)
      for (int r = 1; r <= 2; ++r)
        brute = std::max(brute, oracle::brute_psi(g, s, r, rep.gaps[i]));
    worst = std::max(worst, std::abs(rep.psi[i] - brute));
  }
  if (worst > 1e-10) return {false, "enumeration gap " + fmt("%.2e", worst)};

  std::vector<int> gaps;
  for (int n = 1; n <= 10; ++n) gaps.push_back(n);
  const MixingReport decay = psi_mixing_report(g, 2, gaps);
  if (decay.delta_fit >= 1.0) return {false, "decay base " + fmt("%.3f", decay.delta_fit)};

  const GibbsBand short_band = gibbs_ratio_band(g, 16);
  const GibbsBand long_band = gibbs_ratio_band(g, 32);
  const double drift = std::max(std::abs(long_band.upper / short_band.upper - 1),
                                std::abs(long_band.lower / short_band.lower - 1));
  if (short_band.lower <= 0 || drift > 0.05)
    return {false, "ratio band drifted " + fmt("%.3f", drift)};
  return {true, "enumeration gap " + fmt("%.1e", worst) + ", decay base " +
                    fmt("%.3f", decay.delta_fit) + ", band drift " + fmt("%.3f", drift)};
}

// ---- 14: cross-seed pressure concentration -------------------------------------------

Outcome check_environment_concentration() {
  EnvSpec env;
  env.layers = {coin_layer(), coin_layer()};
  env.layers[0].potential = Eigen::Vector2d(0.2, -0.3);
  env.layers[1].potential = Eigen::Vector2d(-0.4, 0.1);
  env.driver.kind = DriverKind::independent;
  env.driver.probs = {Eigen::Vector2d(0.5, 0.5)};
  env.marked = {0};
  env.window_len = 64;
  validate(env);
  std::vector<std::uint64_t> seeds(64);
  for (int i = 0; i < 64; ++i) seeds[i] = 1000 + i;
  SolveOptions o = quiet();
  o.n = 40;
  const PressureConcentration rep =
      pressure_concentration_report(env, 0.3, seeds, {16, 32, 64, 128, 256}, o);
  if (rep.fit.slope < -0.65 || rep.fit.slope > -0.35)
    return {false, "deviation exponent " + fmt("%.3f", rep.fit.slope)};

  EnvSpec shared;
  shared.layers = {coin_layer(), coin_layer()};
  shared.layers[1].transition = (Eigen::MatrixXi(2, 2) << 0, 1, 1, 0).finished();
  shared.layers[1].potential = Eigen::Vector2d(0, 0);
  shared.driver.kind = DriverKind::markov;
  shared.driver.initial = Eigen::Vector2d(1, 0);
  shared.driver.kernels = {(Eigen::MatrixXd(2, 2) << 0.5, 0.5, 1, 0).finished()};
  shared.marked = {0};
  shared.window_len = 32;
  validate(shared);
  const Eigen::VectorXd m = Eigen::Vector2d(0.5, 0.5);
  const DeterministicHReport fixed = deterministic_h_check(shared, m, {1, 2, 3, 4}, quiet());
  if (!fixed.passed || fixed.max_h_gap > 1e-8)
    return {false, "shared measure drifted " + fmt("%.2e", fixed.max_h_gap)};

  EnvSpec broken = shared;
  broken.layers[0].potential.setZero();
  bool refused = false;
  try {
    deterministic_h_check(broken, m, {1, 2}, quiet());
  } catch (const Error& e) {
    refused = e.code() == Errc::precondition_failed;
  }
  if (!refused) return {false, "control was not refused"};
  return {true, "exponent " + fmt("%.3f", rep.fit.slope) + ", shared gap " +
                    fmt("%.1e", fixed.max_h_gap)};
}

// ---- 15: byte-identical reruns ----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SEQRPF_BIN + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status == -1 || !WIFEXITED(status) ? -1 : WEXITSTATUS(status);
}

Outcome check_determinism() {
  const fs::path dir = fs::temp_directory_path() / "seqrpf_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "llt.json");
    f << R"({"system": {"type": "sft", "preset": "golden-mean", "window_len": 8,
              "observable": {"type": "symbol-linear", "scale": 1.0}},
             "params": {"n_list": [128, 256]}, "seed": 3})";
  }
  {
    std::ofstream f(dir / "rpf.json");
    f << R"({"system": {"type": "sft", "preset": "golden-mean", "window_len": 8},
             "params": {}, "seed": 5})";
  }
  int identical = 0;
  for (const std::string kind : {"llt", "rpf"}) {
    const fs::path a = dir / (kind + "_a");
    const fs::path b = dir / (kind + "_b");
    const std::string cfg = (dir / (kind + ".json")).string();
    if (run_cli(kind + " --config " + cfg + " --out " + a.string()) != 0 ||
        run_cli(kind + " --config " + cfg + " --out " + b.string()) != 0)
      return {false, kind + " run failed"};
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;  // carries wall-clock timestamps
      if (slurp(entry.path()) != slurp(b / name)) return {false, kind + "/" + name + " differed"};
      ++identical;
    }
  }
  return {identical > 0, std::to_string(identical) + " output files identical across reruns"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> checks[] = {
      {"generating function matches cylinder enumeration", check_generating_function},
      {"fixed-point residuals and contraction rate", check_fixed_point},
      {"supplied measure families stay invariant", check_invariant_measures},
      {"perturbation responses scale with the noise", check_stability},
      {"variance dichotomy and witness recovery", check_variance_dichotomy},
      {"centered moments track pressure derivatives", check_moment_asymptotics},
      {"normal approximation error stays root-n", check_normal_approximation},
      {"local gaussian asymptotics on the lattice", check_local_limit},
      {"marked-block counting in a random environment", check_block_counting},
      {"exponential concentration from martingale bounds", check_concentration},
      {"cumulant growth stays linear", check_cumulant_growth},
      {"rate function duality and tail probes", check_large_deviations},
      {"dependence coefficients and cylinder ratios", check_mixing},
      {"cross-seed pressure concentration", check_environment_concentration},
      {"byte-identical reruns", check_determinism},
  };
  int failures = 0;
  int idx = 0;
  for (const auto& [name, fn] : checks) {
    ++idx;
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2d %s (%s)\n", out.ok ? "PASS" : "FAIL", idx, name, out.detail.c_str());
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }
  if (failures) std::printf("%d of 15 criteria failed\n", failures);
  return failures ? 1 : 0;
}

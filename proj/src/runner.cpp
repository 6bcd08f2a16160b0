#include "seqrpf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>

#include "seqrpf/limits.hpp"
#include "seqrpf/rpf.hpp"
#include "seqrpf/svg.hpp"
#include "seqrpf/table.hpp"

namespace seqrpf {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<int> to_int(const std::vector<long>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (long x : v) out.push_back(static_cast<int>(x));
  return out;
}

std::vector<double> to_double(const std::vector<int>& v) {
  return std::vector<double>(v.begin(), v.end());
}

struct Ctx {
  const RunRequest& req;
  ExperimentConfig cfg;
  std::filesystem::path dir;
  std::uint64_t seed = 1;
  json summary = json::object();
  RunResult result;

  const json& params() const { return cfg.params; }

  void emit_table(const std::string& name, const Table& t) {
    if (t.empty()) {
      result.warnings.push_back("table " + name + " is empty, no file written");
      return;
    }
    write_text((dir / name).string(), to_csv(t));
    result.outputs.push_back(name);
  }

  void emit_plot(const std::string& name, const std::vector<Series>& series,
                 const PlotOptions& opts) {
    if (!req.plots) return;
    bool live = false;
    for (const auto& s : series) live = live || !s.x.empty();
    if (!live) return;
    write_text((dir / name).string(), render_plot(series, opts));
    result.outputs.push_back(name);
  }
};

SolveOptions solve_options(const Ctx& c) {
  SolveOptions opts;
  opts.n = static_cast<int>(int_or(c.params(), "solve_n", opts.n, "params"));
  opts.tol = num_or(c.params(), "tol", opts.tol, "params");
  return opts;
}

const SftSpec& need_sft(const Ctx& c) {
  if (c.cfg.system.kind != SystemKind::sft)
    fail(Errc::config_error, "kind '" + c.req.kind + "' needs an sft system");
  return c.cfg.system.sft;
}

const EnvSpec& need_env(const Ctx& c) {
  if (c.cfg.system.kind != SystemKind::environment)
    fail(Errc::config_error, "kind '" + c.req.kind + "' needs an environment system");
  return c.cfg.system.env;
}

// ---- plain transfer-operator kinds -------------------------------------------

void run_rpf(Ctx& c) {
  check_keys(c.params(), {"z_re", "z_im", "horizons", "solve_n", "tol"}, "params");
  const cplx z(num_or(c.params(), "z_re", 0.0, "params"),
               num_or(c.params(), "z_im", 0.0, "params"));
  const SolveOptions opts = solve_options(c);

  std::unique_ptr<OperatorFamily> fam;
  if (c.cfg.system.kind == SystemKind::sft)
    fam = std::make_unique<SftFamily>(c.cfg.system.sft);
  else if (c.cfg.system.kind == SystemKind::circle)
    fam = std::make_unique<CircleFamily>(c.cfg.system.circle);
  else
    fail(Errc::config_error, "kind 'rpf' needs an sft or circle system");

  const TripletFamily trips = solve_family(*fam, z, opts);
  Table t({"slot", "lambda_re", "lambda_im", "eigen_residual", "dual_residual", "n_used"});
  double worst_eigen = 0, worst_dual = 0;
  for (int s = 0; s < trips.window(); ++s) {
    const RpfTriplet& r = trips.slots[s];
    t.add_row({double(s), r.lambda.real(), r.lambda.imag(), r.eigen_residual, r.dual_residual,
               double(r.n_used)});
    worst_eigen = std::max(worst_eigen, r.eigen_residual);
    worst_dual = std::max(worst_dual, r.dual_residual);
  }
  c.emit_table("triplets.csv", t);

  std::vector<long> horizons_default;
  for (int h = 8; h <= 64; h += 8) horizons_default.push_back(h);
  const std::vector<int> horizons =
      to_int(int_list_or(c.params(), "horizons", horizons_default, "params"));
  const int d = fam->dim(fam->j_lo());
  std::vector<Eigen::VectorXcd> tests;
  tests.push_back(Eigen::VectorXcd::Ones(d));
  tests.push_back(Eigen::VectorXcd::Unit(d, 0));
  Eigen::VectorXcd ramp(d);
  for (int a = 0; a < d; ++a) ramp(a) = 1.0 / (1 + a);
  tests.push_back(ramp);

  const ConvergenceFit fit = convergence_rate_fit(*fam, fam->j_lo(), z, horizons, tests, opts);
  Table ct({"horizon", "residual"});
  for (std::size_t i = 0; i < fit.horizons.size(); ++i)
    ct.add_row({double(fit.horizons[i]), fit.residuals[i]});
  c.emit_table("convergence.csv", ct);

  c.summary["max_eigen_residual"] = worst_eigen;
  c.summary["max_dual_residual"] = worst_dual;
  c.summary["windows"] = trips.window();
  c.summary["rate_log_slope"] = fit.fit.slope;
  c.summary["rate_estimate"] = std::exp(fit.fit.slope);
  c.summary["rate_r2"] = fit.fit.r2;
  c.summary["floored_points"] = fit.floored;

  Series s{"worst residual", to_double(fit.horizons), fit.residuals};
  PlotOptions po;
  po.title = "eigendata residual vs composition horizon";
  po.x_label = "horizon";
  po.y_label = "residual";
  po.log_y = true;
  c.emit_plot("residual-decay.svg", {s}, po);
}

void run_stability(Ctx& c) {
  check_keys(c.params(), {"deltas", "probe_radius", "solve_n", "tol"}, "params");
  const SftSpec& spec = need_sft(c);
  const SolveOptions opts = solve_options(c);
  const std::vector<double> deltas =
      num_list_or(c.params(), "deltas", {1e-1, 1e-2, 1e-3}, "params");
  const double radius = num_or(c.params(), "probe_radius", 0.5 * trust_radius(spec), "params");

  const std::vector<StabilityRow> rows = stability_sweep(spec, deltas, radius, c.seed, opts);
  Table t({"delta", "dlambda", "dh", "dnu"});
  for (const auto& r : rows) t.add_row({r.delta, r.dlambda, r.dh, r.dnu});
  c.emit_table("stability.csv", t);

  json ratios = json::array();
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double num = std::max({rows[i].dlambda, rows[i].dh, rows[i].dnu});
    const double den = std::max({rows[i + 1].dlambda, rows[i + 1].dh, rows[i + 1].dnu});
    ratios.push_back(den > 0 ? num / den : 0.0);
  }
  c.summary["probe_radius"] = radius;
  c.summary["response_ratios"] = ratios;

  Series s{"max response", deltas, {}};
  for (const auto& r : rows) s.y.push_back(std::max({r.dlambda, r.dh, r.dnu}));
  PlotOptions po;
  po.title = "perturbation response";
  po.x_label = "input size";
  po.y_label = "response";
  po.log_x = true;
  po.log_y = true;
  c.emit_plot("stability.svg", {s}, po);
}

void run_gibbs(Ctx& c) {
  check_keys(c.params(), {"band_len", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const int band_len = static_cast<int>(int_or(c.params(), "band_len", 16, "params"));

  Table t({"slot", "symbol", "mass", "h", "nu", "log_lambda"});
  for (int s = 0; s < g.window(); ++s)
    for (int a = 0; a < g.marginals[s].size(); ++a)
      t.add_row({double(s), double(a), g.marginals[s](a), g.h0[s](a), g.nu0[s](a),
                 g.log_lambda0[s]});
  c.emit_table("marginals.csv", t);

  const GibbsBand band = gibbs_ratio_band(g, band_len);
  const GibbsBand refined = gibbs_ratio_band(g, 2 * band_len);
  c.summary["band_lower"] = band.lower;
  c.summary["band_upper"] = band.upper;
  c.summary["band_lower_refined"] = refined.lower;
  c.summary["band_upper_refined"] = refined.upper;
  c.summary["kernel_defect"] = g.kernel_defect;
}

void run_mixing(Ctx& c) {
  check_keys(c.params(), {"r_max", "gaps", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const int r_max = static_cast<int>(int_or(c.params(), "r_max", 2, "params"));
  const std::vector<int> gaps =
      to_int(int_list_or(c.params(), "gaps", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, "params"));

  const MixingReport rep = psi_mixing_report(g, r_max, gaps);
  Table t({"gap", "psi"});
  for (std::size_t i = 0; i < rep.gaps.size(); ++i)
    t.add_row({double(rep.gaps[i]), rep.psi[i]});
  c.emit_table("mixing.csv", t);

  c.summary["c_fit"] = rep.c_fit;
  c.summary["delta_fit"] = rep.delta_fit;
  c.summary["fit_r2"] = rep.fit.r2;
  c.summary["floored_points"] = rep.floored;

  Series s{"psi", to_double(rep.gaps), rep.psi};
  PlotOptions po;
  po.title = "dependence coefficient vs gap";
  po.x_label = "gap";
  po.y_label = "psi";
  po.log_y = true;
  c.emit_plot("psi-decay.svg", {s}, po);
}

void run_moments(Ctx& c) {
  check_keys(c.params(), {"k_max", "n_list", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const int k_max = static_cast<int>(int_or(c.params(), "k_max", 4, "params"));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {64, 128, 256, 512, 1024, 2048, 4096}, "params"));

  const MomentReport rep = moments_report(g, g.spec.j_lo, n_list, k_max, solve_options(c));
  Table t({"n", "k", "gamma", "predicted", "gap"});
  for (int k = 2; k <= k_max; ++k)
    for (std::size_t i = 0; i < n_list.size(); ++i)
      t.add_row({double(n_list[i]), double(k), rep.gamma[k][i], rep.predicted[k][i],
                 rep.gap[k][i]});
  c.emit_table("moments.csv", t);

  c.summary["pi2"] = rep.pi2;
  c.summary["pi3"] = rep.pi3;
  json fits = json::object();
  for (int k = 2; k <= k_max; ++k)
    fits["k" + std::to_string(k)] = {{"slope", rep.gap_fit[k].slope},
                                     {"r2", rep.gap_fit[k].r2},
                                     {"points", rep.gap_fit[k].points}};
  c.summary["gap_fits"] = fits;
  c.summary["max_mean_gap"] =
      rep.mean_gap.empty() ? 0.0 : *std::max_element(rep.mean_gap.begin(), rep.mean_gap.end());

  std::vector<Series> series;
  for (int k = 2; k <= k_max; ++k)
    series.push_back({"k=" + std::to_string(k), to_double(n_list), rep.gap[k]});
  PlotOptions po;
  po.title = "normalized moment gap vs n";
  po.x_label = "n";
  po.y_label = "gap";
  po.log_x = true;
  po.log_y = true;
  c.emit_plot("moment-gaps.svg", series, po);
}

void run_variance(Ctx& c) {
  check_keys(c.params(), {"n_list", "horizon", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {16, 32, 64, 128, 256, 512}, "params"));

  const VarianceGrowth rep = variance_growth(g, g.spec.j_lo, n_list);
  Table t({"n", "variance"});
  for (std::size_t i = 0; i < rep.n_list.size(); ++i)
    t.add_row({double(rep.n_list[i]), rep.variance[i]});
  c.emit_table("variance.csv", t);

  c.summary["class"] = rep.cls == VarianceClass::bounded ? "bounded" : "linear";
  c.summary["rate"] = rep.rate;
  c.summary["sup_variance"] = rep.sup_variance;

  if (rep.cls == VarianceClass::bounded) {
    const int horizon = static_cast<int>(int_or(c.params(), "horizon", 96, "params"));
    try {
      const CoboundaryWitness w = coboundary_solve(g, horizon);
      c.summary["witness_residual"] = w.residual;
      c.summary["witness_tail"] = w.tail_estimate;
    } catch (const Error& e) {
      c.result.warnings.push_back(std::string("coboundary recovery failed: ") + e.what());
    }
  }

  Series s{"variance", to_double(rep.n_list), rep.variance};
  PlotOptions po;
  po.title = "variance growth";
  po.x_label = "n";
  po.y_label = "variance";
  po.log_x = true;
  c.emit_plot("variance-growth.svg", {s}, po);
}

void run_berry_esseen(Ctx& c) {
  check_keys(c.params(), {"n_list", "cf_points", "sample_paths", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {64, 128, 256, 512, 1024, 2048, 4096}, "params"));
  CltOptions opts;
  opts.cf_points = static_cast<int>(int_or(c.params(), "cf_points", opts.cf_points, "params"));
  opts.sample_paths =
      static_cast<int>(int_or(c.params(), "sample_paths", opts.sample_paths, "params"));
  opts.seed = c.seed;

  const CltReport rep = berry_esseen_report(g, g.spec.j_lo, n_list, opts);
  Table t({"n", "sigma", "dn", "esseen", "root_n_dn"});
  for (std::size_t i = 0; i < rep.n_list.size(); ++i)
    t.add_row({double(rep.n_list[i]), rep.sigma[i], rep.dn[i], rep.esseen[i], rep.root_n_dn[i]});
  c.emit_table("clt.csv", t);

  bool dominated = !rep.degenerate;
  for (std::size_t i = 0; i < rep.dn.size(); ++i) dominated = dominated && rep.esseen[i] >= rep.dn[i];
  c.summary["band_ratio"] = rep.band_ratio;
  c.summary["c_fit"] = rep.c_fit;
  c.summary["sampled"] = rep.sampled;
  c.summary["degenerate"] = rep.degenerate;
  c.summary["esseen_dominates"] = dominated;

  std::vector<double> root_esseen;
  for (std::size_t i = 0; i < rep.esseen.size(); ++i)
    root_esseen.push_back(rep.esseen[i] * std::sqrt(double(rep.n_list[i])));
  std::vector<Series> series{{"sqrt(n) distance", to_double(rep.n_list), rep.root_n_dn},
                             {"sqrt(n) bound", to_double(rep.n_list), root_esseen}};
  PlotOptions po;
  po.title = "normal-approximation distance";
  po.x_label = "n";
  po.y_label = "sqrt(n) * distance";
  po.log_x = true;
  c.emit_plot("clt-distance.svg", series, po);
}

void run_llt(Ctx& c) {
  check_keys(c.params(), {"n_list", "c0", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {128, 256, 512, 1024, 2048, 4096, 8192}, "params"));
  const double c0 = num_or(c.params(), "c0", 1e-3, "params");

  const LltReport rep = llt_report(g, g.spec.j_lo, n_list, c0);
  Table t({"n", "sigma", "gap"});
  for (std::size_t i = 0; i < rep.n_list.size(); ++i)
    t.add_row({double(rep.n_list[i]), rep.sigma[i], rep.gap[i]});
  c.emit_table("llt.csv", t);

  c.summary["span"] = rep.span;
  c.summary["decreasing"] = rep.decreasing;

  Series s{"gap", to_double(rep.n_list), rep.gap};
  PlotOptions po;
  po.title = "local gaussian mismatch";
  po.x_label = "n";
  po.y_label = "gap";
  po.log_x = true;
  po.log_y = true;
  c.emit_plot("llt-gap.svg", {s}, po);
}

void run_concentration(Ctx& c) {
  check_keys(c.params(), {"n", "t_points", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const int n = static_cast<int>(int_or(c.params(), "n", 256, "params"));
  const int t_points = static_cast<int>(int_or(c.params(), "t_points", 50, "params"));

  const ConcentrationReport rep = concentration_report(g, n, t_points);
  Table t({"t", "exact_tail", "bound"});
  for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
    t.add_row({rep.t_grid[i], rep.exact_tail[i], rep.bound[i]});
  c.emit_table("concentration.csv", t);

  c.summary["n"] = rep.n;
  c.summary["diff_bound"] = rep.diff_bound;
  c.summary["remainder_bound"] = rep.remainder_bound;
  c.summary["violations"] = rep.violations;

  std::vector<Series> series{{"exact tail", rep.t_grid, rep.exact_tail},
                             {"bound", rep.t_grid, rep.bound}};
  PlotOptions po;
  po.title = "tail probability vs certified bound";
  po.x_label = "t";
  po.y_label = "probability";
  po.log_y = true;
  c.emit_plot("concentration.svg", series, po);
}

void run_cumulants(Ctx& c) {
  check_keys(c.params(), {"k_max", "n_list", "radius", "nodes", "solve_n", "tol"}, "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  const int k_max = static_cast<int>(int_or(c.params(), "k_max", 6, "params"));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {256, 512, 1024, 2048, 4096}, "params"));
  const int nodes = static_cast<int>(int_or(c.params(), "nodes", 128, "params"));
  double radius = num_or(c.params(), "radius", 0.0, "params");
  if (radius <= 0) radius = std::min(0.1, trust_radius(g.spec) / 4);

  const CumulantReport rep = cumulant_report(g, g.spec.j_lo, n_list, k_max, radius, nodes);
  Table t({"n", "k", "gamma_over_n"});
  for (int k = 2; k <= k_max; ++k)
    for (std::size_t i = 0; i < n_list.size(); ++i)
      t.add_row({double(n_list[i]), double(k), rep.per_n[k][i]});
  c.emit_table("cumulants.csv", t);

  json variation = json::object();
  for (int k = 2; k <= k_max; ++k) variation["k" + std::to_string(k)] = rep.variation[k];
  c.summary["variation"] = variation;
  c.summary["c0_fit"] = rep.c0_fit;
  c.summary["radius"] = radius;

  std::vector<Series> series;
  for (int k = 2; k <= k_max; ++k)
    series.push_back({"k=" + std::to_string(k), to_double(n_list), rep.per_n[k]});
  PlotOptions po;
  po.title = "cumulant growth rates";
  po.x_label = "n";
  po.y_label = "cumulant / n";
  po.log_x = true;
  c.emit_plot("cumulant-growth.svg", series, po);
}

void run_ldp(Ctx& c) {
  check_keys(c.params(), {"s_cap", "t_points", "n_list", "x_probes", "epsilon_fraction",
                          "md_probes", "md_exponent", "solve_n", "tol"},
             "params");
  const GibbsFamily g = build_gibbs(need_sft(c), solve_options(c));
  LdpOptions opts;
  opts.solve = solve_options(c);
  opts.s_cap = num_or(c.params(), "s_cap", 0.0, "params");
  opts.t_points = static_cast<int>(int_or(c.params(), "t_points", opts.t_points, "params"));
  opts.n_list = to_int(int_list_or(
      c.params(), "n_list", std::vector<long>(opts.n_list.begin(), opts.n_list.end()), "params"));
  opts.x_probes = num_list_or(c.params(), "x_probes", {}, "params");
  opts.epsilon_fraction =
      num_or(c.params(), "epsilon_fraction", opts.epsilon_fraction, "params");
  opts.md_probes = num_list_or(c.params(), "md_probes", opts.md_probes, "params");
  opts.md_exponent = num_or(c.params(), "md_exponent", opts.md_exponent, "params");

  const LdpReport rep = ldp_report(g, opts);

  Table rt({"x", "rate"});
  for (std::size_t i = 0; i < rep.t_grid.size(); ++i) rt.add_row({rep.t_grid[i], rep.rate[i]});
  c.emit_table("rate.csv", rt);

  Table lt({"probe", "n", "gap"});
  for (std::size_t p = 0; p < rep.x_probes.size(); ++p)
    for (std::size_t i = 0; i < rep.n_list.size(); ++i)
      lt.add_row({rep.x_probes[p], double(rep.n_list[i]), rep.local_gap[p][i]});
  c.emit_table("local.csv", lt);

  Table mt({"probe", "n", "gap"});
  for (std::size_t p = 0; p < rep.md_probes.size(); ++p)
    for (std::size_t i = 0; i < rep.n_list.size(); ++i)
      mt.add_row({rep.md_probes[p], double(rep.n_list[i]), rep.md_gap[p][i]});
  c.emit_table("moderate.csv", mt);

  c.summary["s_cap"] = rep.s_cap;
  c.summary["convex"] = rep.convex;
  c.summary["duality_gap"] = rep.duality_gap;
  c.summary["pressure_gap_mgf"] = rep.pressure_gap_mgf;
  c.summary["pressure_gap_functional"] = rep.pressure_gap_functional;
  c.summary["local_decreasing"] = rep.local_decreasing;
  c.summary["md_decreasing"] = rep.md_decreasing;
  c.summary["md_exponent"] = rep.md_exponent;

  Series s{"rate", rep.t_grid, rep.rate};
  PlotOptions po;
  po.title = "deviation rate function";
  po.x_label = "x";
  po.y_label = "rate";
  c.emit_plot("rate-function.svg", {s}, po);
}

// ---- random-environment kinds -------------------------------------------------

void run_env_llt(Ctx& c) {
  check_keys(c.params(),
             {"t_lo", "t_hi", "t_points", "s", "delta0", "block_n", "llt_n", "solve_n", "tol"},
             "params");
  const EnvSpec& env = need_env(c);
  const double t_lo = num_or(c.params(), "t_lo", 0.5, "params");
  const double t_hi = num_or(c.params(), "t_hi", 3.0, "params");
  const int t_points = static_cast<int>(int_or(c.params(), "t_points", 8, "params"));
  const int s = static_cast<int>(int_or(c.params(), "s", 1, "params"));
  const double delta0 = num_or(c.params(), "delta0", 0.5, "params");
  const std::vector<long> block_n =
      int_list_or(c.params(), "block_n", {256, 1024, 4096, 16384}, "params");
  const std::vector<int> llt_n =
      to_int(int_list_or(c.params(), "llt_n", {128, 256, 512, 1024, 2048, 4096, 8192}, "params"));

  const EnvLltReport rep = env_llt_pipeline(env, c.seed, t_lo, t_hi, t_points, s, delta0,
                                            block_n, llt_n, solve_options(c));
  Table bt({"n", "count", "ratio"});
  for (std::size_t i = 0; i < rep.blocks.n_list.size(); ++i)
    bt.add_row({double(rep.blocks.n_list[i]), double(rep.blocks.counts[i]),
                rep.blocks.ratio[i]});
  c.emit_table("blocks.csv", bt);

  Table rt({"t", "rho"});
  for (std::size_t i = 0; i < rep.blocks.t_grid.size(); ++i)
    rt.add_row({rep.blocks.t_grid[i], rep.blocks.rho[i]});
  c.emit_table("rho.csv", rt);

  Table lt({"n", "sigma", "gap"});
  for (std::size_t i = 0; i < rep.llt.n_list.size(); ++i)
    lt.add_row({double(rep.llt.n_list[i]), rep.llt.sigma[i], rep.llt.gap[i]});
  c.emit_table("llt.csv", lt);

  c.summary["rho_max"] = rep.blocks.rho_max;
  c.summary["ratio_increasing"] = rep.blocks.ratio_increasing;
  c.summary["norm_bound"] = rep.blocks.norm_bound;
  c.summary["marked_hits"] = rep.real.marked_hits.size();
  c.summary["llt_decreasing"] = rep.llt.decreasing;
  c.summary["llt_span"] = rep.llt.span;

  std::vector<double> bx;
  for (long n : rep.blocks.n_list) bx.push_back(double(n));
  Series s1{"count / ln n", bx, rep.blocks.ratio};
  PlotOptions po;
  po.title = "matching block count";
  po.x_label = "n";
  po.y_label = "count / ln n";
  po.log_x = true;
  c.emit_plot("block-count.svg", {s1}, po);

  Series s2{"gap", to_double(rep.llt.n_list), rep.llt.gap};
  PlotOptions po2;
  po2.title = "local gaussian mismatch along the realization";
  po2.x_label = "n";
  po2.y_label = "gap";
  po2.log_x = true;
  po2.log_y = true;
  c.emit_plot("llt-gap.svg", {s2}, po2);
}

void run_env_pressure(Ctx& c) {
  check_keys(c.params(), {"z", "seed_count", "n_list", "horizon", "tol"}, "params");
  const EnvSpec& env = need_env(c);
  const double z = num_or(c.params(), "z", 0.3, "params");
  const int seed_count = static_cast<int>(int_or(c.params(), "seed_count", 64, "params"));
  const std::vector<int> n_list =
      to_int(int_list_or(c.params(), "n_list", {16, 32, 64, 128, 256, 512, 1024}, "params"));
  SolveOptions opts;
  opts.n = static_cast<int>(int_or(c.params(), "horizon", 40, "params"));
  opts.tol = num_or(c.params(), "tol", opts.tol, "params");

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < seed_count; ++i) seeds.push_back(derive_stream(c.seed, i));

  const PressureConcentration rep = pressure_concentration_report(env, z, seeds, n_list, opts);
  Table t({"n", "mean_pressure", "deviation"});
  for (std::size_t i = 0; i < rep.n_list.size(); ++i)
    t.add_row({double(rep.n_list[i]), rep.mean_pressure[i], rep.deviation[i]});
  c.emit_table("pressure.csv", t);

  c.summary["z"] = rep.z;
  c.summary["seed_count"] = seed_count;
  c.summary["deviation_exponent"] = rep.fit.slope;
  c.summary["fit_r2"] = rep.fit.r2;
  c.summary["locality_gap"] = rep.locality_gap;

  Series s{"deviation", to_double(rep.n_list), rep.deviation};
  PlotOptions po;
  po.title = "cross-seed pressure deviation";
  po.x_label = "n";
  po.y_label = "mean absolute deviation";
  po.log_x = true;
  po.log_y = true;
  c.emit_plot("pressure-deviation.svg", {s}, po);
}

void run_env_mixing(Ctx& c) {
  check_keys(c.params(), {"gaps", "s", "block_n"}, "params");
  const EnvSpec& env = need_env(c);
  const std::vector<int> gaps =
      to_int(int_list_or(c.params(), "gaps", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, "params"));

  const PhiMixingReport phi = phi_mixing_exact(env, gaps);
  Table pt({"gap", "phi", "partial_sum"});
  for (std::size_t i = 0; i < phi.n_list.size(); ++i)
    pt.add_row({double(phi.n_list[i]), phi.phi[i], phi.partial_sums[i]});
  c.emit_table("phi.csv", pt);
  c.summary["phi_sum"] = phi.partial_sums.empty() ? 0.0 : phi.partial_sums.back();
  c.summary["phi_last"] = phi.phi.empty() ? 0.0 : phi.phi.back();

  if (!env.marked.empty()) {
    const int s = static_cast<int>(int_or(c.params(), "s", 1, "params"));
    const std::vector<long> block_n =
        int_list_or(c.params(), "block_n", {4, 16, 64, 256, 1024, 4096}, "params");
    const PropGrowthReport growth = propgrowth_report(env, s, block_n);
    Table bt({"n", "block_sum", "ratio"});
    for (std::size_t i = 0; i < growth.n_list.size(); ++i)
      bt.add_row({double(growth.n_list[i]), growth.block_sum[i], growth.ratio[i]});
    c.emit_table("block-growth.csv", bt);
    c.summary["blocks_compliant"] = growth.compliant;
    c.summary["blocks_diverging"] = growth.diverging;
  } else {
    c.result.warnings.push_back("no marked cycle, block growth skipped");
  }

  Series s{"phi", to_double(phi.n_list), phi.phi};
  PlotOptions po;
  po.title = "driver mixing coefficient";
  po.x_label = "gap";
  po.y_label = "phi";
  po.log_y = true;
  c.emit_plot("phi-decay.svg", {s}, po);
}

void run_env_h(Ctx& c) {
  check_keys(c.params(), {"measure", "seed_count", "solve_n", "tol"}, "params");
  const EnvSpec& env = need_env(c);
  const int d = static_cast<int>(env.layers.front().transition.rows());
  Eigen::VectorXd m = Eigen::VectorXd::Constant(d, 1.0 / d);
  if (c.params().contains("measure")) {
    const std::vector<double> vals = num_list_or(c.params(), "measure", {}, "params");
    require(static_cast<int>(vals.size()) == d, Errc::config_error,
            "params: 'measure' must have one entry per symbol");
    for (int a = 0; a < d; ++a) m(a) = vals[a];
  }
  const int seed_count = static_cast<int>(int_or(c.params(), "seed_count", 8, "params"));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < seed_count; ++i) seeds.push_back(derive_stream(c.seed, i));

  const DeterministicHReport rep = deterministic_h_check(env, m, seeds, solve_options(c));
  c.summary["layer_defect"] = rep.layer_defect;
  c.summary["max_h_gap"] = rep.max_h_gap;
  c.summary["max_lambda_gap"] = rep.max_lambda_gap;
  c.summary["max_nu_gap"] = rep.max_nu_gap;
  c.summary["passed"] = rep.passed;
}

using KindFn = void (*)(Ctx&);

const std::vector<std::pair<std::string, KindFn>>& kind_table() {
  static const std::vector<std::pair<std::string, KindFn>> table = {
      {"rpf", run_rpf},
      {"stability", run_stability},
      {"gibbs", run_gibbs},
      {"mixing", run_mixing},
      {"moments", run_moments},
      {"variance", run_variance},
      {"berry-esseen", run_berry_esseen},
      {"llt", run_llt},
      {"concentration", run_concentration},
      {"cumulants", run_cumulants},
      {"ldp", run_ldp},
      {"env-llt", run_env_llt},
      {"env-pressure", run_env_pressure},
      {"env-mixing", run_env_mixing},
      {"env-h", run_env_h},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> ks;
    for (const auto& [name, fn] : kind_table()) ks.push_back(name);
    return ks;
  }();
  return kinds;
}

RunResult run_experiment(const RunRequest& req) {
  KindFn fn = nullptr;
  for (const auto& [name, f] : kind_table())
    if (name == req.kind) fn = f;
  if (!fn) {
    std::string names;
    for (const auto& k : known_kinds()) names += (names.empty() ? "" : ", ") + k;
    fail(Errc::config_error, "unknown kind '" + req.kind + "' (expected one of " + names + ")");
  }

  const std::string started = utc_now();
  Ctx ctx{req, load_config(req.config_path), std::filesystem::path(req.out_dir), 1, {}, {}};
  if (req.seed_override) ctx.seed = *req.seed_override;
  else ctx.seed = ctx.cfg.seed;

  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec) fail(Errc::config_error, "cannot create output directory " + ctx.dir.string());

  fn(ctx);

  write_text((ctx.dir / "summary.json").string(), ctx.summary.dump(2) + "\n");
  ctx.result.outputs.push_back("summary.json");

  json manifest = json::object();
  manifest["kind"] = req.kind;
  manifest["version"] = kVersion;
  manifest["config_hash"] = hex64(ctx.cfg.hash);
  manifest["seed"] = ctx.seed;
  manifest["jobs"] = req.jobs;
  manifest["outputs"] = ctx.result.outputs;
  manifest["warnings"] = ctx.result.warnings;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  write_text((ctx.dir / "manifest.json").string(), manifest.dump(2) + "\n");
  ctx.result.outputs.push_back("manifest.json");

  return ctx.result;
}

}  // namespace seqrpf

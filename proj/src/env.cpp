#include "seqrpf/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace seqrpf {

namespace {

int layer_count(const EnvSpec& env) { return static_cast<int>(env.layers.size()); }

int shared_dim(const EnvSpec& env) {
  return static_cast<int>(env.layers.front().transition.rows());
}

long driver_period(const EnvSpec& env) {
  return env.driver.kind == DriverKind::independent
             ? static_cast<long>(env.driver.probs.size())
             : static_cast<long>(env.driver.kernels.size());
}

// one-step support graph on layers, joined over all periodic slots
Eigen::MatrixXi driver_support(const EnvSpec& env) {
  const int Y = layer_count(env);
  Eigen::MatrixXi sup = Eigen::MatrixXi::Zero(Y, Y);
  if (env.driver.kind == DriverKind::independent) {
    for (const auto& p : env.driver.probs)
      for (int y = 0; y < Y; ++y)
        if (p[y] > 0) sup.col(y).setOnes();
  } else {
    for (const auto& k : env.driver.kernels)
      for (int x = 0; x < Y; ++x)
        for (int y = 0; y < Y; ++y)
          if (k(x, y) > 0) sup(x, y) = 1;
  }
  return sup;
}

// layers the driver can occupy at some time: positive probability in any slot
// for independent drivers, forward closure of the initial support otherwise
std::vector<bool> occupiable_layers(const EnvSpec& env, const Eigen::MatrixXi& sup) {
  const int Y = layer_count(env);
  std::vector<bool> occ(Y, false);
  if (env.driver.kind == DriverKind::independent) {
    for (const auto& p : env.driver.probs)
      for (int y = 0; y < Y; ++y)
        if (p[y] > 0) occ[y] = true;
    return occ;
  }
  for (int y = 0; y < Y; ++y) occ[y] = env.driver.initial[y] > 0;
  for (bool grew = true; grew;) {
    grew = false;
    for (int x = 0; x < Y; ++x)
      if (occ[x])
        for (int y = 0; y < Y; ++y)
          if (sup(x, y) > 0 && !occ[y]) {
            occ[y] = true;
            grew = true;
          }
  }
  return occ;
}

// walks every support path of env.n0 layers and demands an all-positive
// transition product; path counts stay tiny for the horizons in use
void check_composite_positivity(const EnvSpec& env) {
  const int Y = layer_count(env);
  const int d = shared_dim(env);
  const Eigen::MatrixXi sup = driver_support(env);
  const std::vector<bool> occ = occupiable_layers(env, sup);

  std::vector<int> path;
  std::function<void(int, const Eigen::MatrixXi&)> walk = [&](int depth,
                                                              const Eigen::MatrixXi& prod) {
    if (depth == env.n0) {
      if ((prod.array() > 0).all()) return;
      std::ostringstream what;
      what << "layer sequence";
      for (int y : path) what << ' ' << y;
      what << " has a zero in its " << env.n0 << "-step transition product";
      fail(Errc::non_primitive, what.str());
    }
    for (int y = 0; y < Y; ++y) {
      if (depth == 0 ? !occ[y] : sup(path.back(), y) == 0) continue;
      Eigen::MatrixXi next = prod * env.layers[y].transition;
      // clamp to keep repeated products from overflowing int
      next = next.cwiseMin(1);
      path.push_back(y);
      walk(depth + 1, next);
      path.pop_back();
    }
  };
  walk(0, Eigen::MatrixXi::Identity(d, d));
}

int pick_layer(Rng& rng, const Eigen::VectorXd& p) {
  std::vector<double> w(p.data(), p.data() + p.size());
  return rng.pick(w);
}

void require_distribution(const Eigen::VectorXd& p, int size, const char* what) {
  require(p.size() == size, Errc::invalid_spec,
          std::string(what) + " has the wrong number of entries");
  require((p.array() >= 0).all(), Errc::invalid_spec,
          std::string(what) + " has a negative entry");
  require(std::abs(p.sum() - 1.0) <= 1e-9, Errc::invalid_spec,
          std::string(what) + " does not sum to one");
}

}  // namespace

void validate(const EnvSpec& env) {
  require(!env.layers.empty(), Errc::invalid_spec, "environment needs at least one layer");
  require(env.n0 >= 1, Errc::invalid_spec, "positivity horizon must be at least 1");
  require(env.window_len >= 1, Errc::invalid_spec, "window length must be positive");

  const int d = shared_dim(env);
  require(d >= 1, Errc::invalid_spec, "layers need a nonempty alphabet");
  for (std::size_t i = 0; i < env.layers.size(); ++i) {
    const EnvLayer& lay = env.layers[i];
    const std::string tag = "layer " + std::to_string(i);
    require(lay.transition.rows() == d && lay.transition.cols() == d, Errc::invalid_spec,
            tag + ": transition must be square over the shared alphabet");
    require(((lay.transition.array() == 0) || (lay.transition.array() == 1)).all(),
            Errc::invalid_spec, tag + ": transition entries must be 0 or 1");
    for (int a = 0; a < d; ++a) {
      require(lay.transition.row(a).sum() > 0, Errc::invalid_spec,
              tag + ": symbol " + std::to_string(a) + " has no successor");
      require(lay.transition.col(a).sum() > 0, Errc::invalid_spec,
              tag + ": symbol " + std::to_string(a) + " has no predecessor");
    }
    require(lay.potential.size() == d && lay.observable.size() == d, Errc::invalid_spec,
            tag + ": potential and observable must match the alphabet");
    require(lay.potential.allFinite() && lay.observable.allFinite(), Errc::invalid_spec,
            tag + ": potential and observable must be finite");
  }

  const int Y = layer_count(env);
  if (env.driver.kind == DriverKind::independent) {
    require(!env.driver.probs.empty(), Errc::invalid_driver,
            "independent driver needs at least one distribution");
    for (const auto& p : env.driver.probs) require_distribution(p, Y, "driver distribution");
  } else {
    require(!env.driver.kernels.empty(), Errc::invalid_driver,
            "markov driver needs at least one kernel");
    require_distribution(env.driver.initial, Y, "driver initial distribution");
    for (const auto& k : env.driver.kernels) {
      require(k.rows() == Y && k.cols() == Y, Errc::invalid_driver,
              "driver kernel must be square over the layer set");
      require((k.array() >= 0).all(), Errc::invalid_driver, "driver kernel has a negative entry");
      for (int x = 0; x < Y; ++x)
        require(std::abs(k.row(x).sum() - 1.0) <= 1e-9, Errc::invalid_driver,
                "driver kernel row " + std::to_string(x) + " does not sum to one");
    }
  }

  for (int y : env.marked)
    require(y >= 0 && y < Y, Errc::invalid_spec, "marked state out of range");

  check_composite_positivity(env);
}

Eigen::MatrixXd driver_kernel(const EnvSpec& env, long t) {
  const int Y = layer_count(env);
  const long p = driver_period(env);
  if (env.driver.kind == DriverKind::markov) return env.driver.kernels[t % p];
  // independent selection: the next state ignores the current one
  Eigen::MatrixXd k(Y, Y);
  const Eigen::VectorXd& next = env.driver.probs[(t + 1) % p];
  for (int x = 0; x < Y; ++x) k.row(x) = next.transpose();
  return k;
}

Eigen::VectorXd driver_marginal(const EnvSpec& env, long t) {
  const long p = driver_period(env);
  if (env.driver.kind == DriverKind::independent) return env.driver.probs[t % p];
  Eigen::RowVectorXd m = env.driver.initial.transpose();
  for (long s = 0; s < t; ++s) m = m * env.driver.kernels[s % p];
  return m.transpose();
}

Realization realize(const EnvSpec& env, std::uint64_t seed, long len) {
  validate(env);
  require(len >= 1, Errc::invalid_spec, "realization length must be positive");

  const long p = driver_period(env);
  Rng rng(derive_stream(seed, 0));
  std::vector<int> path(static_cast<std::size_t>(len));
  if (env.driver.kind == DriverKind::independent) {
    for (long t = 0; t < len; ++t) path[t] = pick_layer(rng, env.driver.probs[t % p]);
  } else {
    path[0] = pick_layer(rng, env.driver.initial);
    for (long t = 1; t < len; ++t) {
      const Eigen::MatrixXd& k = env.driver.kernels[(t - 1) % p];
      path[t] = pick_layer(rng, k.row(path[t - 1]).transpose());
    }
  }

  const int d = shared_dim(env);
  SftSpec spec;
  spec.j_lo = 0;
  spec.j_hi = len - 1;
  spec.extension = Extension::periodic;
  spec.constants.n0 = env.n0;
  spec.alphabet_sizes.assign(static_cast<std::size_t>(len), d);
  spec.transitions.reserve(path.size());
  spec.potentials.reserve(path.size());
  spec.observables.reserve(path.size());
  for (long t = 0; t < len; ++t) {
    const EnvLayer& lay = env.layers[path[t]];
    spec.transitions.push_back(lay.transition);
    spec.potentials.push_back(lay.potential);
    spec.observables.push_back(lay.observable);
  }
  validate(spec);

  Realization real;
  real.seed = seed;
  real.path = std::move(path);
  real.spec = std::move(spec);
  const long m0 = static_cast<long>(env.marked.size());
  if (m0 > 0) {
    for (long m = 0; m + m0 <= len; ++m) {
      bool hit = true;
      for (long i = 0; i < m0 && hit; ++i) hit = real.path[m + i] == env.marked[i];
      if (hit) real.marked_hits.push_back(m);
    }
  }
  return real;
}

PhiMixingReport phi_mixing_exact(const EnvSpec& env, const std::vector<int>& n_list) {
  validate(env);
  require(!n_list.empty(), Errc::invalid_spec, "mixing report needs gaps");
  for (int n : n_list) require(n >= 1, Errc::invalid_spec, "mixing gaps must be positive");

  const int Y = layer_count(env);
  const long horizon = std::min<long>(env.window_len, 512);
  const int n_max = *std::max_element(n_list.begin(), n_list.end());

  std::vector<Eigen::VectorXd> marg(static_cast<std::size_t>(horizon + n_max + 1));
  marg[0] = env.driver.kind == DriverKind::independent ? env.driver.probs[0] : env.driver.initial;
  for (long t = 0; t + 1 < static_cast<long>(marg.size()); ++t)
    marg[t + 1] = (marg[t].transpose() * driver_kernel(env, t)).transpose();

  PhiMixingReport rep;
  rep.n_list = n_list;
  for (int n : n_list) {
    double worst = 0;
    for (long i = 0; i < horizon; ++i) {
      Eigen::MatrixXd cond = Eigen::MatrixXd::Identity(Y, Y);
      for (long t = i; t < i + n; ++t) cond = cond * driver_kernel(env, t);
      for (int a = 0; a < Y; ++a) {
        if (marg[i](a) <= 1e-14) continue;
        const double tv = 0.5 * (cond.row(a).transpose() - marg[i + n]).cwiseAbs().sum();
        worst = std::max(worst, tv);
      }
    }
    rep.phi.push_back(worst);
  }
  double acc = 0;
  for (double v : rep.phi) rep.partial_sums.push_back(acc += v);
  return rep;
}

PropGrowthReport propgrowth_report(const EnvSpec& env, int s, const std::vector<long>& n_list) {
  validate(env);
  require(!env.marked.empty(), Errc::invalid_spec, "growth report needs a marked cycle");
  require(s >= 1, Errc::invalid_spec, "cycle repetition count must be positive");
  require(!n_list.empty(), Errc::invalid_spec, "growth report needs block horizons");

  const long m0 = static_cast<long>(env.marked.size());
  const long L = static_cast<long>(s) * m0;
  const long n_max = *std::max_element(n_list.begin(), n_list.end());
  require(n_max >= 2, Errc::invalid_spec, "block horizons must reach at least 2");

  std::vector<int> cyc(static_cast<std::size_t>(L));
  for (long i = 0; i < L; ++i) cyc[i] = env.marked[i % m0];

  // exact probability that the marked cycle starts at m, summed as we go
  std::vector<double> prefix(static_cast<std::size_t>(n_max) + 1, 0.0);
  Eigen::VectorXd marg =
      env.driver.kind == DriverKind::independent ? env.driver.probs[0] : env.driver.initial;
  bool any_positive = false;
  for (long m = 0; m < n_max; ++m) {
    double prob = marg(cyc[0]);
    for (long i = 0; i + 1 < L && prob > 0; ++i)
      prob *= driver_kernel(env, m + i)(cyc[i], cyc[i + 1]);
    any_positive = any_positive || prob > 0;
    prefix[m + 1] = prefix[m] + prob;
    marg = (marg.transpose() * driver_kernel(env, m)).transpose();
  }

  PropGrowthReport rep;
  rep.s = s;
  rep.n_list = n_list;
  for (long n : n_list) {
    require(n >= 1 && n <= n_max, Errc::invalid_spec, "block horizon out of range");
    rep.block_sum.push_back(prefix[n]);
    const double scale = n >= 2 ? std::sqrt(static_cast<double>(n) * std::log(double(n))) : 1.0;
    rep.ratio.push_back(prefix[n] / scale);
  }
  rep.compliant = any_positive;
  rep.diverging = any_positive && rep.ratio.size() >= 2 && rep.ratio.back() > rep.ratio.front();
  return rep;
}

EnvLltReport env_llt_pipeline(const EnvSpec& env, std::uint64_t seed, double t_lo, double t_hi,
                              int t_points, int s, double delta0,
                              const std::vector<long>& block_n, const std::vector<int>& llt_n,
                              const SolveOptions& opts) {
  validate(env);
  require(!env.marked.empty(), Errc::invalid_spec, "pipeline needs a marked cycle");
  require(!block_n.empty(), Errc::invalid_spec, "pipeline needs block horizons");

  const long m0 = static_cast<long>(env.marked.size());
  const long L = static_cast<long>(s) * m0;
  long len = *std::max_element(block_n.begin(), block_n.end()) + L + 1;
  if (!llt_n.empty())
    len = std::max(len, static_cast<long>(*std::max_element(llt_n.begin(), llt_n.end())) + 1);
  len = std::max(len, env.window_len);

  EnvLltReport rep;
  rep.real = realize(env, seed, len);
  const GibbsFamily g = build_gibbs(rep.real.spec, opts);

  SftSpec loop;
  loop.j_lo = 0;
  loop.j_hi = m0 - 1;
  loop.alphabet_sizes.assign(static_cast<std::size_t>(m0), shared_dim(env));
  for (long i = 0; i < m0; ++i) {
    const EnvLayer& lay = env.layers[env.marked[i]];
    loop.transitions.push_back(lay.transition);
    loop.potentials.push_back(lay.potential);
    loop.observables.push_back(lay.observable);
  }
  loop.constants.n0 = env.n0;
  validate(loop);

  rep.blocks = genper_block_count(g, loop, t_lo, t_hi, t_points, s, delta0, block_n, opts);
  if (!llt_n.empty()) rep.llt = llt_report(g, 0, llt_n);
  return rep;
}

PressureConcentration pressure_concentration_report(const EnvSpec& env, double z,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    const std::vector<int>& n_list,
                                                    const SolveOptions& opts) {
  validate(env);
  require(seeds.size() >= 2, Errc::invalid_spec, "concentration needs several seeds");
  require(!n_list.empty(), Errc::invalid_spec, "concentration needs horizons");

  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  const long len = static_cast<long>(n_max) + opts.n + 1;
  const int S = static_cast<int>(seeds.size());

  // running averages (1/n) sum_{m<n} of the per-index pressure increments
  std::vector<std::vector<double>> avg(static_cast<std::size_t>(S));
  parallel_for(S, 0, [&](int si) {
    const Realization real = realize(env, seeds[si], len);
    const SftFamily fam(real.spec);
    std::vector<double> prefix(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int m = 0; m < n_max; ++m) {
      const RpfTriplet at_z = solve_triplet(fam, m, cplx(z, 0), opts);
      const RpfTriplet at_0 = solve_triplet(fam, m, cplx(0, 0), opts);
      prefix[m + 1] = prefix[m] + std::log(std::abs(at_z.lambda)) -
                      std::log(std::abs(at_0.lambda));
    }
    std::vector<double> rows;
    for (int n : n_list) rows.push_back(prefix[n] / n);
    avg[si] = std::move(rows);
  });

  PressureConcentration rep;
  rep.z = z;
  rep.n_list = n_list;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    double mean = 0;
    for (int si = 0; si < S; ++si) mean += avg[si][k];
    mean /= S;
    double dev = 0;
    for (int si = 0; si < S; ++si) dev += std::abs(avg[si][k] - mean);
    dev /= S;
    rep.mean_pressure.push_back(mean);
    rep.deviation.push_back(dev);
  }

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (rep.deviation[k] <= 0) continue;
    lx.push_back(std::log(static_cast<double>(n_list[k])));
    ly.push_back(std::log(rep.deviation[k]));
  }
  rep.fit = fit_line(lx, ly);

  // the solver only reads forward data, so cutting the realization to
  // [j, j+horizon] is the same as shortening the horizon; compare against a
  // halved horizon to expose the tail the truncation discards
  {
    const Realization real = realize(env, seeds[0], len);
    const SftFamily fam(real.spec);
    SolveOptions half = opts;
    half.n = std::max(8, opts.n / 2);
    half.enforce = false;
    for (int j : {0, n_max / 2, n_max - 1}) {
      const double full = std::log(std::abs(solve_triplet(fam, j, cplx(z, 0), opts).lambda)) -
                          std::log(std::abs(solve_triplet(fam, j, cplx(0, 0), opts).lambda));
      const double cut = std::log(std::abs(solve_triplet(fam, j, cplx(z, 0), half).lambda)) -
                         std::log(std::abs(solve_triplet(fam, j, cplx(0, 0), half).lambda));
      rep.locality_gap = std::max(rep.locality_gap, std::abs(full - cut));
    }
  }
  return rep;
}

DeterministicHReport deterministic_h_check(const EnvSpec& env, const Eigen::VectorXd& m,
                                           const std::vector<std::uint64_t>& seeds,
                                           const SolveOptions& opts, double tol) {
  validate(env);
  const int d = shared_dim(env);
  require(m.size() == d, Errc::invalid_spec, "measure must live on the shared alphabet");
  require((m.array() > 0).all(), Errc::invalid_spec, "measure must be strictly positive");
  require(std::abs(m.sum() - 1.0) <= 1e-9, Errc::invalid_spec, "measure must sum to one");
  require(!seeds.empty(), Errc::invalid_spec, "check needs at least one seed");

  DeterministicHReport rep;

  // each layer's adjoint must fix m exactly with unit scalar, otherwise the
  // realized duals cannot be seed-independent
  for (std::size_t i = 0; i < env.layers.size(); ++i) {
    const EnvLayer& lay = env.layers[i];
    for (int a = 0; a < d; ++a) {
      double pulled = 0;
      for (int b = 0; b < d; ++b)
        if (lay.transition(a, b) != 0) pulled += m(b);
      pulled *= std::exp(lay.potential(a));
      rep.layer_defect = std::max(rep.layer_defect, std::abs(pulled - m(a)));
    }
  }
  if (rep.layer_defect > 1e-9)
    fail(Errc::precondition_failed,
         "a layer's adjoint does not fix the supplied measure (defect " +
             std::to_string(rep.layer_defect) + ")");

  Eigen::VectorXd h_ref;
  for (std::uint64_t seed : seeds) {
    const Realization real = realize(env, seed, env.window_len);
    const GibbsFamily g = build_gibbs(real.spec, opts);
    for (int sl = 0; sl < g.window(); ++sl) {
      if (h_ref.size() == 0) h_ref = g.h0[sl];
      rep.max_h_gap = std::max(rep.max_h_gap, (g.h0[sl] - h_ref).cwiseAbs().maxCoeff());
      rep.max_lambda_gap =
          std::max(rep.max_lambda_gap, std::abs(std::exp(g.log_lambda0[sl]) - 1.0));
      rep.max_nu_gap = std::max(rep.max_nu_gap, (g.nu0[sl] - m).cwiseAbs().maxCoeff());
    }
  }
  rep.passed = rep.max_h_gap <= tol && rep.max_lambda_gap <= tol && rep.max_nu_gap <= tol;
  return rep;
}

}  // namespace seqrpf

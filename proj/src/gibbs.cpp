#include "seqrpf/gibbs.hpp"

#include <cmath>
#include <limits>

namespace seqrpf {

namespace {

Eigen::VectorXd real_cast(const Eigen::VectorXcd& v, const char* what) {
  require(v.imag().cwiseAbs().maxCoeff() < 1e-9, Errc::precondition_failed,
          std::string(what) + " has a nontrivial imaginary part at z=0");
  return v.real();
}

}  // namespace

double GibbsFamily::log_lambda_sum(long j, int n) const {
  double acc = 0;
  for (int m = 0; m < n; ++m) acc += log_lambda0[resolve(j + m)];
  return acc;
}

GibbsFamily build_gibbs(const SftSpec& spec, const SolveOptions& opts) {
  GibbsFamily g;
  g.spec = spec.memory == 1 ? spec : recode_to_memory_one(spec);
  const SftFamily fam(g.spec);
  g.t0 = solve_family(fam, cplx(0, 0), opts);

  const int w = g.window();
  for (int s = 0; s < w; ++s) {
    const long j = g.spec.j_lo + s;
    g.steps0.push_back(build_sft_operator(g.spec, j, cplx(0, 0)).entries.real());
    const auto& t = g.t0.slots[s];
    require(std::abs(t.lambda.imag()) < 1e-9, Errc::precondition_failed,
            "leading scalar not real at z=0");
    g.log_lambda0.push_back(std::log(t.lambda.real()));
    Eigen::VectorXd h = real_cast(t.h, "h");
    Eigen::VectorXd nu = real_cast(t.nu.transpose(), "nu");
    require((h.array() > 0).all() && (nu.array() > 0).all(), Errc::precondition_failed,
            "triplet lost positivity at z=0");
    g.h0.push_back(h);
    g.nu0.push_back(nu);
    g.marginals.push_back(h.cwiseProduct(nu));
  }

  // one-step kernels: admissible moves weighted by the dual mass they lead to
  for (int s = 0; s < w; ++s) {
    const long j = g.spec.j_lo + s;
    const auto& A = g.spec.transition(j);
    const auto& f = g.spec.potential(j);
    const auto& nu_next = g.nu0[g.resolve(j + 1)];
    const double lam = std::exp(g.log_lambda0[s]);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (int a = 0; a < A.rows(); ++a) {
      for (int b = 0; b < A.cols(); ++b)
        if (A(a, b) == 1) P(a, b) = std::exp(f[a]) * nu_next[b] / (lam * g.nu0[s][a]);
      const double rowsum = P.row(a).sum();
      g.kernel_defect = std::max(g.kernel_defect, std::abs(rowsum - 1.0));
      P.row(a) /= rowsum;
    }
    g.kernels.push_back(std::move(P));
  }
  return g;
}

double cylinder_mass(const GibbsFamily& g, long j, const std::vector<int>& word) {
  require(!word.empty(), Errc::invalid_spec, "empty word");
  const int len = static_cast<int>(word.size());
  double log_w = 0;
  for (int i = 0; i < len; ++i) {
    require(word[i] >= 0 && word[i] < g.dim(j + i), Errc::invalid_spec, "symbol out of range");
    if (i > 0 && g.spec.transition(j + i - 1)(word[i - 1], word[i]) == 0) return 0;
    log_w += g.spec.potential(j + i)[word[i]];
  }
  // forward mass of the word times the dual mass of everything it can lead to
  const auto& A_last = g.spec.transition(j + len - 1);
  const auto& nu_next = g.nu0[g.resolve(j + len)];
  double reach = 0;
  for (int b = 0; b < A_last.cols(); ++b)
    if (A_last(word[len - 1], b) == 1) reach += nu_next[b];
  const double h_first = g.h0[g.resolve(j)][word[0]];
  return h_first * reach * std::exp(log_w - g.log_lambda_sum(j, len));
}

Eigen::MatrixXd kernel_product(const GibbsFamily& g, long j, int n) {
  require(n >= 1, Errc::invalid_spec, "kernel product needs n >= 1");
  Eigen::MatrixXd P = g.kernel(j);
  for (int m = 1; m < n; ++m) P = P * g.kernel(j + m);
  return P;
}

void center_observables(GibbsFamily& g) {
  for (int s = 0; s < g.window(); ++s) {
    Eigen::VectorXd& u = g.spec.observables[s];
    const double mean = g.marginals[s].dot(u);
    if (std::abs(mean) <= 1e-14 * std::max(1.0, u.cwiseAbs().maxCoeff())) continue;
    u.array() -= mean;
  }
  g.spec.constants.B = 0;
}

PathBatch sample_paths(const GibbsFamily& g, long j, int len, int count, std::uint64_t seed) {
  require(len >= 1 && count >= 1, Errc::invalid_spec, "bad sampling request");
  PathBatch batch;
  batch.j = j;
  batch.seed = seed;
  batch.paths.resize(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    std::vector<int>& path = batch.paths[i];
    path.resize(len);
    const Eigen::VectorXd& m0 = g.marginal(j);
    path[0] = rng.pick(std::vector<double>(m0.data(), m0.data() + m0.size()));
    for (int t = 1; t < len; ++t) {
      const Eigen::MatrixXd& P = g.kernel(j + t - 1);
      std::vector<double> row(P.cols());
      for (int b = 0; b < P.cols(); ++b) row[b] = P(path[t - 1], b);
      path[t] = rng.pick(row);
    }
  }
  return batch;
}

double correlation(const GibbsFamily& g, long j, const Eigen::VectorXd& obs_now,
                   const Eigen::VectorXd& obs_later, int n) {
  const Eigen::VectorXd& m = g.marginal(j);
  const Eigen::MatrixXd K = kernel_product(g, j, n);
  const double joint = m.dot(obs_now.cwiseProduct(K * obs_later));
  return joint - m.dot(obs_now) * g.marginal(j + n).dot(obs_later);
}

ConvergenceFit correlation_decay_check(const GibbsFamily& g, long j,
                                       const Eigen::VectorXd& obs_now,
                                       const Eigen::VectorXd& obs_later,
                                       const std::vector<int>& n_list) {
  ConvergenceFit out;
  out.horizons = n_list;
  for (int n : n_list) out.residuals.push_back(std::abs(correlation(g, j, obs_now, obs_later, n)));
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < out.residuals.size(); ++i) {
    if (out.residuals[i] <= 1e-15) {
      ++out.floored;
      continue;
    }
    xs.push_back(static_cast<double>(n_list[i]));
    ys.push_back(std::log(out.residuals[i]));
  }
  if (xs.size() < 2)
    out.degenerate = true;
  else
    out.fit = fit_line(xs, ys);
  return out;
}

MixingReport psi_mixing_report(const GibbsFamily& g, int r_max, const std::vector<int>& gaps) {
  require(r_max >= 1, Errc::invalid_spec, "rank bound must be >= 1");
  MixingReport rep;
  rep.gaps = gaps;

  for (int n : gaps) {
    double worst = 0;
    for (int s = 0; s < g.window(); ++s) {
      const long j = g.spec.j_lo + s;
      for (int r = 1; r <= r_max; ++r) {
        // endpoint of the first block: any symbol reachable at j+r-1
        const long jend = j + r - 1;
        const long jb = jend + 1 + n;  // the second block starts after the gap
        const Eigen::MatrixXd K = kernel_product(g, jend, n + 1);
        const Eigen::VectorXd& mb = g.marginal(jb);
        for (int a = 0; a < g.dim(jend); ++a) {
          if (g.marginal(jend)[a] <= 0) continue;
          for (int b = 0; b < g.dim(jb); ++b)
            worst = std::max(worst, std::abs(K(a, b) / mb[b] - 1.0));
        }
      }
    }
    rep.psi.push_back(worst);
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.psi.size(); ++i) {
    if (rep.psi[i] <= 1e-15) {
      ++rep.floored;
      continue;
    }
    xs.push_back(static_cast<double>(gaps[i]));
    ys.push_back(std::log(rep.psi[i]));
  }
  if (xs.size() < 2) {
    rep.degenerate = true;
  } else {
    rep.fit = fit_line(xs, ys);
    rep.c_fit = std::exp(rep.fit.intercept);
    rep.delta_fit = std::exp(rep.fit.slope);
  }
  return rep;
}

GibbsBand gibbs_ratio_band(const GibbsFamily& g, int max_len) {
  GibbsBand band;
  band.lower = std::numeric_limits<double>::infinity();
  band.upper = 0;
  // the ratio only depends on the first symbol's h and the reachable dual mass
  // after the last symbol, so scan those over all positions and lengths
  for (int s = 0; s < g.window(); ++s) {
    const long j = g.spec.j_lo + s;
    Eigen::MatrixXi connect = Eigen::MatrixXi::Identity(g.dim(j), g.dim(j));
    for (int len = 1; len <= max_len; ++len) {
      const long jend = j + len - 1;
      if (len > 1) connect = (connect * g.spec.transition(jend - 1)).cwiseMin(1);
      const auto& A_last = g.spec.transition(jend);
      for (int a0 = 0; a0 < g.dim(j); ++a0) {
        for (int ae = 0; ae < g.dim(jend); ++ae) {
          if (connect(a0, ae) == 0) continue;  // no admissible word joins them
          double reach = 0;
          for (int b = 0; b < A_last.cols(); ++b)
            if (A_last(ae, b) == 1) reach += g.nu0[g.resolve(jend + 1)][b];
          const double ratio = g.h0[g.resolve(j)][a0] * reach;
          band.lower = std::min(band.lower, ratio);
          band.upper = std::max(band.upper, ratio);
        }
      }
    }
  }
  return band;
}

}  // namespace seqrpf

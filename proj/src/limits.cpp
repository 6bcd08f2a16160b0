#include "seqrpf/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "seqrpf/rpf.hpp"

namespace seqrpf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// compensated accumulation; the distribution tables mix magnitudes badly
// enough that plain sums lose digits we later assert on
struct Kahan {
  double sum = 0, carry = 0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// one tilde step: depth-1 data at time t to time t+1, normalized so constants
// are fixed and the z=0 growth is divided out
Eigen::VectorXd tilde_step(const GibbsFamily& g, long t, const Eigen::VectorXd& v) {
  const int st = g.resolve(t);
  const int sn = g.resolve(t + 1);
  Eigen::VectorXd w = g.steps0[st] * v.cwiseProduct(g.h0[st]);
  return (w.array() / (std::exp(g.log_lambda0[st]) * g.h0[sn].array())).matrix();
}

std::vector<Eigen::VectorXd> centered_observables(const GibbsFamily& g) {
  std::vector<Eigen::VectorXd> uc(g.window());
  for (int s = 0; s < g.window(); ++s) {
    const Eigen::VectorXd& u = g.spec.observables[s];
    uc[s] = u.array() - g.marginals[s].dot(u);
  }
  return uc;
}

// conditional-series seed at time `anchor`: sum over i >= 1 of the i-step
// tilde image of the centered observable i steps back, truncated at `horizon`
Eigen::VectorXd series_seed(const GibbsFamily& g, const std::vector<Eigen::VectorXd>& uc,
                            long anchor, int horizon) {
  Eigen::VectorXd v = uc[g.resolve(anchor - horizon)];
  for (long t = anchor - horizon; t < anchor - 1; ++t)
    v = tilde_step(g, t, v) + uc[g.resolve(t + 1)];
  return tilde_step(g, anchor - 1, v);
}

// raw generating value and its log, shared by the report routines
cplx log_mgf(const GibbsFamily& g, long j, int n, cplx z) {
  SftFamily fam(g.spec);
  ScaledProduct p = compose_scaled(fam, j, n, z);
  if (p.rank_deficient) fail(Errc::branch_loss, "generating-function product vanished");
  const cplx inner = (g.nu0[g.resolve(j + n)].cast<cplx>().transpose() *
                      (p.matrix * g.h0[g.resolve(j)].cast<cplx>()))(0);
  if (std::abs(inner) < 1e-300) fail(Errc::branch_loss, "generating-function value underflowed");
  return std::log(inner) + cplx(p.log_scale - g.log_lambda_sum(j, n), 0);
}

// central moments from cumulants (first cumulant dropped, which is exactly
// the centering): m_k = sum_i C(k-1, i-1) kappa_i m_{k-i}
std::vector<double> central_moments(const std::vector<double>& kappa, int k_max) {
  std::vector<std::vector<double>> choose(k_max + 1, std::vector<double>(k_max + 1, 0));
  for (int a = 0; a <= k_max; ++a) {
    choose[a][0] = 1;
    for (int b = 1; b <= a; ++b)
      choose[a][b] = choose[a - 1][b - 1] + (b <= a - 1 ? choose[a - 1][b] : 0);
  }
  std::vector<double> m(k_max + 1, 0);
  m[0] = 1;
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0;
    for (int i = 2; i <= k; ++i) acc += choose[k - 1][i - 1] * kappa[i] * m[k - i];
    m[k] = acc;
  }
  return m;
}

bool trend_decreasing(const std::vector<double>& v, double slack) {
  if (v.size() < 2) return false;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] * (1 + slack) + 1e-300) return false;
  return v.back() < v.front();
}

}  // namespace

// ---- lattice structure ------------------------------------------------------

std::optional<double> lattice_span(const GibbsFamily& g, double tol) {
  double vmax = 0;
  for (int s = 0; s < g.window(); ++s)
    vmax = std::max(vmax, g.spec.observables[s].cwiseAbs().maxCoeff());
  if (vmax <= 1e-14) return 0.0;

  const double floor = tol * vmax;
  double span = 0;
  for (int s = 0; s < g.window(); ++s)
    for (int a = 0; a < g.spec.observables[s].size(); ++a) {
      double v = std::abs(g.spec.observables[s][a]);
      if (v <= floor) continue;
      if (span == 0) {
        span = v;
        continue;
      }
      // real gcd: fold onto the distance to the nearest multiple
      double x = std::max(span, v), y = std::min(span, v);
      while (y > floor) {
        double r = std::fmod(x, y);
        r = std::min(r, y - r);
        x = y;
        y = r;
      }
      span = x;
    }
  if (span <= floor) return std::nullopt;
  for (int s = 0; s < g.window(); ++s)
    for (int a = 0; a < g.spec.observables[s].size(); ++a) {
      const double q = g.spec.observables[s][a] / span;
      if (std::abs(q - std::llround(q)) > tol * (1 + std::abs(q))) return std::nullopt;
    }
  return span;
}

double ExactDistribution::cdf(double x) const {
  Kahan acc;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (value(i) > x) break;
    acc.add(prob[i]);
  }
  return std::min(1.0, acc.sum);
}

double ExactDistribution::tail_geq(double x) const {
  Kahan acc;
  for (std::size_t i = prob.size(); i-- > 0;) {
    if (value(i) < x) break;
    acc.add(prob[i]);
  }
  return std::min(1.0, acc.sum);
}

double ExactDistribution::tail_abs_geq(double x) const {
  Kahan acc;
  for (std::size_t i = 0; i < prob.size(); ++i)
    if (std::abs(value(i) - mean) >= x) acc.add(prob[i]);
  return std::min(1.0, acc.sum);
}

double ExactDistribution::interval_prob(double lo, double hi) const {
  Kahan acc;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double v = value(i);
    if (v >= lo && v <= hi) acc.add(prob[i]);
  }
  return std::min(1.0, acc.sum);
}

ExactDistribution exact_distribution(const GibbsFamily& g, long j, int n,
                                     std::size_t state_cap) {
  require(n >= 1, Errc::invalid_spec, "horizon must be positive");
  const std::optional<double> sp = lattice_span(g);
  require(sp.has_value(), Errc::precondition_failed,
          "exact distribution needs a lattice observable");

  ExactDistribution out;
  out.j = j;
  out.n = n;

  if (*sp == 0) {  // observable vanishes: point mass at zero
    out.span = 1;
    out.prob = {1.0};
    return out;
  }
  out.span = *sp;

  // integer levels per time step, plus the enclosing range of prefix sums
  std::vector<std::vector<long>> levels(n);
  long lo = 0, hi = 0;
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd& u = g.spec.observable(j + t);
    levels[t].resize(u.size());
    long lmin = std::numeric_limits<long>::max(), lmax = std::numeric_limits<long>::min();
    for (int a = 0; a < u.size(); ++a) {
      levels[t][a] = std::llround(u[a] / out.span);
      lmin = std::min(lmin, levels[t][a]);
      lmax = std::max(lmax, levels[t][a]);
    }
    lo += std::min(0L, lmin);
    hi += std::max(0L, lmax);
  }
  const std::size_t size = static_cast<std::size_t>(hi - lo + 1);
  std::size_t dmax = 0;
  for (int t = 0; t <= n; ++t) dmax = std::max(dmax, static_cast<std::size_t>(g.dim(j + t)));
  require(size * dmax <= state_cap, Errc::state_cap_exceeded,
          "lattice state table exceeds the configured cap");

  std::vector<double> cur(size * dmax, 0.0), nxt;
  {
    const Eigen::VectorXd& m0 = g.marginal(j);
    const std::size_t base = static_cast<std::size_t>(-lo) * dmax;
    for (int a = 0; a < m0.size(); ++a) cur[base + a] = m0[a];
  }
  for (int t = 0; t < n; ++t) {
    const int da = g.dim(j + t), db = g.dim(j + t + 1);
    const Eigen::MatrixXd& ker = g.kernel(j + t);
    nxt.assign(size * dmax, 0.0);
    for (std::size_t v = 0; v < size; ++v) {
      const std::size_t row = v * dmax;
      for (int a = 0; a < da; ++a) {
        const double mass = cur[row + a];
        if (mass == 0.0) continue;
        const std::size_t vrow =
            static_cast<std::size_t>(static_cast<long>(v) + levels[t][a]) * dmax;
        for (int b = 0; b < db; ++b) nxt[vrow + b] += mass * ker(a, b);
      }
    }
    cur.swap(nxt);
  }

  out.origin = static_cast<double>(lo) * out.span;
  out.prob.assign(size, 0.0);
  for (std::size_t v = 0; v < size; ++v) {
    Kahan acc;
    for (std::size_t a = 0; a < dmax; ++a) acc.add(cur[v * dmax + a]);
    out.prob[v] = acc.sum;
  }
  // trim zero fringes so atom scans touch the true hull only
  std::size_t first = 0, last = out.prob.size();
  while (first < last && out.prob[first] == 0.0) ++first;
  while (last > first && out.prob[last - 1] == 0.0) --last;
  require(first < last, Errc::precondition_failed, "distribution table came out empty");
  out.origin += static_cast<double>(first) * out.span;
  std::vector<double> trimmed(out.prob.begin() + static_cast<long>(first),
                              out.prob.begin() + static_cast<long>(last));
  out.prob = std::move(trimmed);

  Kahan m1;
  for (std::size_t i = 0; i < out.prob.size(); ++i) m1.add(out.prob[i] * out.value(i));
  out.mean = m1.sum;
  Kahan m2;
  for (std::size_t i = 0; i < out.prob.size(); ++i) {
    const double d = out.value(i) - out.mean;
    m2.add(out.prob[i] * d * d);
  }
  out.variance = m2.sum;
  out.sigma = std::sqrt(std::max(0.0, out.variance));
  return out;
}

cplx exact_mgf(const GibbsFamily& g, long j, int n, cplx z) {
  return std::exp(log_mgf(g, j, n, z));
}

namespace {

// Enough contour nodes to keep consecutive phase steps well inside the unwrap
// guard: the argument of the generating value winds at most n*radius*sup|u|
// full turns around the circle.
int contour_nodes(const GibbsFamily& g, long j, int n, double radius) {
  double u_sup = 0;
  for (int m = 0; m < n; ++m) {
    const Eigen::VectorXd& u = g.spec.observable(j + m);
    if (u.size() > 0) u_sup = std::max(u_sup, u.cwiseAbs().maxCoeff());
  }
  return std::max(128, static_cast<int>(8 * std::ceil(n * radius * u_sup)));
}

}  // namespace

std::vector<double> exact_cumulants(const GibbsFamily& g, long j, int n, int k_max,
                                    double radius, int nodes) {
  require(k_max >= 1 && radius > 0, Errc::invalid_spec, "bad cumulant request");
  require(nodes >= 4 * (k_max + 1), Errc::invalid_spec, "too few quadrature nodes");
  // The requested node count is a floor, not a contract; raise it when the
  // phase winds too fast for the unwrap to follow at that resolution.
  nodes = std::max(nodes, contour_nodes(g, j, n, radius));

  SftFamily fam(g.spec);
  const double drop = g.log_lambda_sum(j, n);
  std::vector<double> logabs(nodes), phase(nodes);
  std::vector<cplx> inner(nodes);
  for (int m = 0; m < nodes; ++m) {
    const double theta = 2 * kPi * m / nodes;
    const cplx z = radius * cplx(std::cos(theta), std::sin(theta));
    ScaledProduct p = compose_scaled(fam, j, n, z);
    if (p.rank_deficient) fail(Errc::branch_loss, "generating-function product vanished");
    inner[m] = (g.nu0[g.resolve(j + n)].cast<cplx>().transpose() *
                (p.matrix * g.h0[g.resolve(j)].cast<cplx>()))(0);
    if (std::abs(inner[m]) < 1e-300)
      fail(Errc::branch_loss, "generating function vanished on the contour");
    logabs[m] = std::log(std::abs(inner[m])) + p.log_scale - drop;
  }
  // continuous argument around the contour, anchored at the positive real
  // axis where the generating value is itself positive
  phase[0] = std::arg(inner[0]);
  for (int m = 1; m < nodes; ++m) {
    const double step = std::arg(inner[m] / inner[m - 1]);
    if (std::abs(step) > 2.5)
      fail(Errc::branch_loss, "phase step too large on the cumulant contour");
    phase[m] = phase[m - 1] + step;
  }
  const double winding =
      (phase[nodes - 1] + std::arg(inner[0] / inner[nodes - 1]) - phase[0]) / (2 * kPi);
  if (std::abs(winding) > 0.5)
    fail(Errc::branch_loss, "log branch wound around zero on the cumulant contour");

  std::vector<double> kappa(k_max + 1, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    cplx acc{0, 0};
    for (int m = 0; m < nodes; ++m) {
      const double theta = 2 * kPi * m * k / nodes;
      acc += cplx(logabs[m], phase[m]) * cplx(std::cos(theta), -std::sin(theta));
    }
    acc *= factorial(k) / (static_cast<double>(nodes) * std::pow(radius, k));
    kappa[k] = acc.real();
  }
  kappa[0] = std::abs(kappa[0]);  // quality probe
  return kappa;
}

// ---- moment asymptotics -----------------------------------------------------

double moment_constant_even(int k) {
  require(k >= 2 && k % 2 == 0, Errc::invalid_spec, "even order required");
  return std::pow(2.0, -k / 2.0) * factorial(k) / factorial(k / 2);
}

double moment_constant_odd(int k) {
  require(k >= 3 && k % 2 == 1, Errc::invalid_spec, "odd order >= 3 required");
  return factorial(k) / 6.0 * std::pow(2.0, -(k - 3) / 2.0) / factorial((k - 3) / 2);
}

MomentReport moments_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                            int k_max, const SolveOptions& opts) {
  require(k_max >= 2 && !n_list.empty(), Errc::invalid_spec, "bad moment request");
  MomentReport rep;
  rep.j = j;
  rep.n_list = n_list;
  rep.k_max = k_max;
  rep.gamma.assign(k_max + 1, std::vector<double>(n_list.size(), 0));
  rep.predicted = rep.gamma;
  rep.gap = rep.gamma;
  rep.gap_fit.assign(k_max + 1, LineFit{});
  rep.mean_gap.assign(n_list.size(), 0);

  SftFamily fam(g.spec);
  const double trust = trust_radius(g.spec);
  PressureOptions popts;
  popts.solve = opts;
  PressureSequence ps = pressure_derivatives(fam, 3, trust / 2, 64, popts);
  const double qrad = std::min(0.05, trust / 4);

  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const int n = n_list[i];
    const std::vector<double> kappa = exact_cumulants(g, j, n, k_max, qrad);
    const std::vector<double> mu = central_moments(kappa, k_max);
    const double pi2 = ps.averaged(j, 2, n, fam);
    const double pi3 = ps.averaged(j, 3, n, fam);
    for (int k = 2; k <= k_max; ++k) {
      rep.gamma[k][i] = mu[k] / std::pow(static_cast<double>(n), k / 2);
      rep.predicted[k][i] = (k % 2 == 0)
                                ? moment_constant_even(k) * std::pow(pi2, k / 2)
                                : moment_constant_odd(k) * pi3 * std::pow(pi2, (k - 3) / 2);
      rep.gap[k][i] = std::abs(rep.gamma[k][i] - rep.predicted[k][i]);
    }
    // first-derivative identity: the exact mean against the pressure slope
    double mean_exact = 0, mean_pressure = 0;
    for (int m = 0; m < n; ++m) {
      mean_exact += g.mean(j + m, g.spec.observable(j + m));
      mean_pressure += ps.derivative(j + m, 1, fam);
    }
    rep.mean_gap[i] = std::abs(mean_exact - mean_pressure);
  }
  rep.pi2 = ps.averaged(j, 2, n_list.back(), fam);
  rep.pi3 = ps.averaged(j, 3, n_list.back(), fam);

  for (int k = 2; k <= k_max; ++k) {
    std::vector<double> xs, ys;
    double scale = 0;
    for (std::size_t i = 0; i < n_list.size(); ++i)
      scale = std::max(scale, std::abs(rep.gamma[k][i]));
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      if (rep.gap[k][i] <= 1e-13 * std::max(1.0, scale)) continue;
      xs.push_back(std::log(static_cast<double>(n_list[i])));
      ys.push_back(std::log(rep.gap[k][i]));
    }
    if (xs.size() >= 2) rep.gap_fit[k] = fit_line(xs, ys);
  }
  return rep;
}

// ---- coboundary / variance dichotomy ---------------------------------------

CoboundaryWitness coboundary_solve(const GibbsFamily& g, int horizon, double tail_tol) {
  require(horizon >= 4, Errc::invalid_spec, "series horizon too short");
  const std::vector<Eigen::VectorXd> uc = centered_observables(g);
  const int W = g.window();

  CoboundaryWitness out;
  out.horizon = horizon;
  out.w.resize(W);

  double inc_prev = 0, inc_last = 0;
  for (int s = 0; s < W; ++s) {
    const long k = g.spec.j_lo + s;
    out.w[s] = series_seed(g, uc, k, horizon);
    // raw decay of the series terms, for the truncation-tail estimate
    Eigen::VectorXd term = uc[g.resolve(k - horizon)];
    for (long t = k - horizon; t < k; ++t) {
      if (t == k - 1) inc_prev = std::max(inc_prev, term.cwiseAbs().maxCoeff());
      term = tilde_step(g, t, term);
    }
    inc_last = std::max(inc_last, term.cwiseAbs().maxCoeff());
  }
  if (inc_last > 0) {
    const double ratio = inc_prev > 0 ? inc_last / inc_prev : 1.0;
    if (ratio >= 1.0)
      fail(Errc::horizon_insufficient, "series terms are not contracting yet");
    out.tail_estimate = inc_last * ratio / (1 - ratio);
  }
  if (out.tail_estimate > tail_tol)
    fail(Errc::horizon_insufficient, "series tail above tolerance, raise the horizon");

  for (int s = 0; s < W; ++s) {
    const long t = g.spec.j_lo + s;
    const Eigen::MatrixXi& A = g.spec.transition(t);
    const Eigen::VectorXd& y_now = out.w[s];
    const Eigen::VectorXd& y_next = out.w[g.resolve(t + 1)];
    for (int a = 0; a < A.rows(); ++a)
      for (int b = 0; b < A.cols(); ++b) {
        if (A(a, b) == 0) continue;
        out.residual =
            std::max(out.residual, std::abs(uc[s][a] - (y_next[b] - y_now[a])));
      }
  }
  return out;
}

VarianceGrowth variance_growth(const GibbsFamily& g, long j, const std::vector<int>& n_list) {
  require(!n_list.empty(), Errc::invalid_spec, "empty horizon list");
  VarianceGrowth out;
  out.n_list = n_list;
  out.variance.reserve(n_list.size());

  const std::optional<double> sp = lattice_span(g);
  const double qrad = std::min(0.05, trust_radius(g.spec) / 4);
  for (int n : n_list) {
    double var;
    if (sp.has_value())
      var = exact_distribution(g, j, n).variance;
    else
      var = exact_cumulants(g, j, n, 2, qrad)[2];
    out.variance.push_back(var);
    out.sup_variance = std::max(out.sup_variance, var);
  }
  out.rate = out.variance.back() / n_list.back();

  if (out.sup_variance <= 1e-12) {
    out.cls = VarianceClass::bounded;
    return out;
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (out.variance[i] <= 1e-13 * out.sup_variance) continue;
    xs.push_back(std::log(static_cast<double>(n_list[i])));
    ys.push_back(std::log(out.variance[i]));
  }
  const double slope = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
  out.cls = slope >= 0.5 ? VarianceClass::linear : VarianceClass::bounded;
  return out;
}

// ---- central limit behaviour --------------------------------------------------

namespace {

double kolmogorov_from_atoms(const ExactDistribution& d) {
  double gap = 0;
  Kahan cdf;
  for (std::size_t i = 0; i < d.prob.size(); ++i) {
    if (d.prob[i] == 0.0) continue;
    const double s = (d.value(i) - d.mean) / d.sigma;
    const double phi = norm_cdf(s);
    gap = std::max(gap, std::abs(phi - cdf.sum));  // approach from the left
    cdf.add(d.prob[i]);
    gap = std::max(gap, std::abs(cdf.sum - phi));  // value at the atom
  }
  return gap;
}

}  // namespace

CltReport berry_esseen_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                              const CltOptions& opts) {
  require(!n_list.empty(), Errc::invalid_spec, "empty horizon list");
  CltReport rep;
  rep.j = j;
  rep.n_list = n_list;

  const std::optional<double> sp = lattice_span(g);
  rep.sampled = !sp.has_value();
  const double qrad = std::min(0.05, trust_radius(g.spec) / 4);

  for (int n : n_list) {
    double mean, sigma, dn;
    if (!rep.sampled) {
      const ExactDistribution dist = exact_distribution(g, j, n);
      mean = dist.mean;
      sigma = dist.sigma;
      if (dist.variance <= 1e-10 * n) {
        rep.degenerate = true;
        break;
      }
      dn = kolmogorov_from_atoms(dist);
    } else {
      mean = 0;
      for (int m = 0; m < n; ++m) mean += g.mean(j + m, g.spec.observable(j + m));
      const double var = exact_cumulants(g, j, n, 2, qrad)[2];
      if (var <= 1e-10 * n) {
        rep.degenerate = true;
        break;
      }
      sigma = std::sqrt(var);
      PathBatch batch = sample_paths(g, j, n, opts.sample_paths, opts.seed);
      std::vector<double> samples(batch.paths.size());
      for (std::size_t i = 0; i < batch.paths.size(); ++i) {
        double s = 0;
        for (int t = 0; t < n; ++t) s += g.spec.observable(j + t)[batch.paths[i][t]];
        samples[i] = (s - mean) / sigma;
      }
      std::sort(samples.begin(), samples.end());
      dn = 0;
      const double N = static_cast<double>(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const double phi = norm_cdf(samples[i]);
        dn = std::max(dn, std::max(std::abs((i + 1) / N - phi), std::abs(phi - i / N)));
      }
    }
    rep.sigma.push_back(sigma);
    rep.dn.push_back(dn);
    rep.root_n_dn.push_back(std::sqrt(static_cast<double>(n)) * dn);

    // smoothing-inequality bound from the exact characteristic function on
    // [0, T]; every T is admissible, so take the best of a few candidates
    const double tmax = 2 * std::sqrt(static_cast<double>(n));
    const int cells = opts.cf_points + (opts.cf_points % 2);  // Simpson wants even
    std::vector<double> integrand(cells + 1, 0.0);
    for (int m = 1; m <= cells; ++m) {
      const double t = tmax * m / cells;
      const cplx psi1 =
          exact_mgf(g, j, n, cplx(0, t / sigma)) * std::exp(cplx(0, -t * mean / sigma));
      const double psi2 = std::exp(-t * t / 2);
      integrand[m] = std::abs(psi1 - psi2) / t;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int frac = 1; frac <= 4; ++frac) {
      const int stop = cells * frac / 4;
      if (stop < 2 || stop % 2 != 0) continue;
      const double T = tmax * frac / 4;
      const double h = T / stop;
      double simpson = integrand[0] + integrand[stop];
      for (int m = 1; m < stop; ++m) simpson += integrand[m] * (m % 2 ? 4.0 : 2.0);
      simpson *= h / 3;
      best = std::min(best, (2 / kPi) * simpson + 24 / (kPi * T * std::sqrt(2 * kPi)));
    }
    rep.esseen.push_back(best);
  }

  if (rep.degenerate) {
    rep.n_list.resize(rep.dn.size());
    rep.sigma.resize(rep.dn.size());
  }
  if (!rep.root_n_dn.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0, logsum = 0;
    for (double v : rep.root_n_dn) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      logsum += std::log(std::max(v, 1e-300));
    }
    rep.band_ratio = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    rep.c_fit = std::exp(logsum / static_cast<double>(rep.root_n_dn.size()));
  }
  return rep;
}

LltReport llt_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                     double c0) {
  require(!n_list.empty(), Errc::invalid_spec, "empty horizon list");
  const std::optional<double> sp = lattice_span(g);
  require(sp.has_value(), Errc::precondition_failed, "local theorem needs a lattice observable");
  if (*sp == 0) fail(Errc::variance_too_small, "observable vanishes, no variance growth");

  LltReport rep;
  rep.j = j;
  rep.span = *sp;
  rep.c0 = c0;
  rep.n_list = n_list;
  for (int n : n_list) {
    const ExactDistribution dist = exact_distribution(g, j, n);
    if (dist.variance < c0 * n)
      fail(Errc::variance_too_small, "variance growth floor violated");
    rep.sigma.push_back(dist.sigma);
    double gap = 0;
    const double root = std::sqrt(2 * kPi) * dist.sigma;
    for (std::size_t i = 0; i < dist.prob.size(); ++i) {
      const double r = dist.value(i) - dist.mean;
      const double gauss = rep.span * std::exp(-r * r / (2 * dist.variance));
      gap = std::max(gap, std::abs(root * dist.prob[i] - gauss));
    }
    rep.gap.push_back(gap);
  }
  rep.decreasing = trend_decreasing(rep.gap, 0.10);
  return rep;
}

CfDecayScan cf_decay_scan(const GibbsFamily& g, double t_lo, double t_hi, int t_points,
                          const std::vector<int>& n_list) {
  require(t_points >= 2 && t_hi > t_lo, Errc::invalid_spec, "bad frequency grid");
  require(!n_list.empty(), Errc::invalid_spec, "empty horizon list");
  CfDecayScan scan;
  scan.n_list = n_list;
  scan.t_grid.resize(t_points);
  for (int i = 0; i < t_points; ++i)
    scan.t_grid[i] = t_lo + (t_hi - t_lo) * i / (t_points - 1);
  scan.sup_ratio.assign(n_list.size(), 0.0);

  SftFamily fam(g.spec);
  const long j = g.spec.j_lo;
  const int n_max = n_list.back();
  for (double t : scan.t_grid) {
    std::vector<Eigen::MatrixXcd> steps(g.window());
    for (int s = 0; s < g.window(); ++s)
      steps[s] = build_sft_operator(g.spec, g.spec.j_lo + s, cplx(0, t)).entries;
    ScaledProduct p;
    p.matrix = Eigen::MatrixXcd::Identity(g.dim(j), g.dim(j));
    p.j = j;
    std::size_t slot = 0;
    for (int n = 1; n <= n_max; ++n) {
      p.absorb(steps[g.resolve(j + n - 1)]);
      if (slot < n_list.size() && n == n_list[slot]) {
        const double log_ratio = p.log_scale +
                                 std::log(p.matrix.cwiseAbs().rowwise().sum().maxCoeff()) -
                                 g.log_lambda_sum(j, n);
        scan.sup_ratio[slot] =
            std::max(scan.sup_ratio[slot], std::sqrt(static_cast<double>(n)) * std::exp(log_ratio));
        ++slot;
      }
    }
  }
  scan.vanishing = scan.sup_ratio.back() < scan.sup_ratio.front();
  return scan;
}

// ---- block counting against a periodic reference loop ------------------------

GenPerReport genper_block_count(const GibbsFamily& realized, const SftSpec& loop_spec,
                                double t_lo, double t_hi, int t_points, int s, double delta0,
                                const std::vector<long>& n_list, const SolveOptions& opts) {
  require(s >= 1 && t_points >= 2 && !n_list.empty(), Errc::invalid_spec, "bad block request");
  require(delta0 > 0 && delta0 < 1, Errc::invalid_spec, "contraction margin out of range");
  const int m0 = loop_spec.window();
  const int L = s * m0;
  const long n_max = n_list.back();
  require(realized.window() >= n_max + L, Errc::invalid_spec,
          "realization window too short for the requested block count");
  const int d = realized.dim(realized.spec.j_lo);
  for (long m = 0; m <= n_max + L; ++m)
    require(realized.dim(realized.spec.j_lo + m) == d, Errc::invalid_spec,
            "block comparison needs a fixed alphabet");
  require(loop_spec.dim(loop_spec.j_lo) == d, Errc::invalid_spec,
          "reference loop alphabet does not match the realization");

  GenPerReport rep;
  rep.n_list = n_list;
  rep.t_grid.resize(t_points);
  for (int i = 0; i < t_points; ++i)
    rep.t_grid[i] = t_lo + (t_hi - t_lo) * i / (t_points - 1);

  const GibbsFamily loop = build_gibbs(loop_spec, opts);
  const long j0 = realized.spec.j_lo;

  std::vector<double> worst(n_max, 0.0);  // per block start: max over t of the gap
  rep.rho.resize(t_points);
  for (int ti = 0; ti < t_points; ++ti) {
    const double t = rep.t_grid[ti];
    const cplx z(0, t);
    // reference loop composition over one period, z=0 growth divided out
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(d, d);
    for (int m = 0; m < m0; ++m)
      ref = build_sft_operator(loop_spec, loop_spec.j_lo + m, z).entries * ref;
    ref /= std::exp(loop.log_lambda_sum(loop_spec.j_lo, m0));

    // spectral radius of the one-period loop by power iteration
    {
      Eigen::VectorXcd v = Eigen::VectorXcd::Ones(d);
      cplx rq_prev{0, 0};
      double rho = 0;
      for (int it = 0; it < 200; ++it) {
        Eigen::VectorXcd w = ref * v;
        const double norm = w.norm();
        if (norm < 1e-300) {
          rho = 0;
          break;
        }
        v = w / norm;
        const cplx rq = (v.adjoint() * (ref * v))(0);
        rho = std::abs(rq);
        if (std::abs(rq - rq_prev) <= 1e-10 * (1 + std::abs(rq))) break;
        rq_prev = rq;
      }
      rep.rho[ti] = rho;
      rep.rho_max = std::max(rep.rho_max, rho);
    }

    Eigen::MatrixXcd ref_pow = Eigen::MatrixXcd::Identity(d, d);
    for (int k = 0; k < s; ++k) ref_pow = ref * ref_pow;
    rep.norm_bound = std::max(rep.norm_bound, ref_pow.cwiseAbs().rowwise().sum().maxCoeff());

    std::vector<Eigen::MatrixXcd> steps(realized.window());
    for (int sl = 0; sl < realized.window(); ++sl)
      steps[sl] = build_sft_operator(realized.spec, j0 + sl, z).entries;
    for (long m = 0; m < n_max; ++m) {
      Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(d, d);
      for (int k = 0; k < L; ++k) prod = steps[realized.resolve(j0 + m + k)] * prod;
      prod /= std::exp(realized.log_lambda_sum(j0 + m, L));
      rep.norm_bound = std::max(rep.norm_bound, prod.cwiseAbs().rowwise().sum().maxCoeff());
      const double gap = (prod - ref_pow).cwiseAbs().rowwise().sum().maxCoeff();
      worst[m] = std::max(worst[m], gap);
    }
  }

  long count = 0;
  std::size_t slot = 0;
  rep.counts.resize(n_list.size());
  rep.ratio.resize(n_list.size());
  for (long m = 0; m < n_max; ++m) {
    if (rep.norm_bound * worst[m] < 1 - delta0) ++count;
    if (slot < n_list.size() && m + 1 == n_list[slot]) {
      rep.counts[slot] = count;
      rep.ratio[slot] = static_cast<double>(count) / std::log(static_cast<double>(n_list[slot]));
      ++slot;
    }
  }
  rep.ratio_increasing = true;
  for (std::size_t i = 0; i + 1 < rep.ratio.size(); ++i)
    if (rep.ratio[i + 1] < rep.ratio[i] * (1 - 1e-12)) rep.ratio_increasing = false;
  if (rep.ratio.back() <= rep.ratio.front()) rep.ratio_increasing = false;
  return rep;
}

// ---- martingale approximation and concentration ------------------------------

MartingaleParts martingale_decompose(const GibbsFamily& g, int n) {
  require(n >= 1, Errc::invalid_spec, "horizon must be positive");
  const std::vector<Eigen::VectorXd> uc = centered_observables(g);
  const long j0 = g.spec.j_lo;

  MartingaleParts parts;
  parts.n = n;
  parts.s_series.resize(n + 1);
  parts.s_series[0] = series_seed(g, uc, j0, 96);
  for (int k = 0; k < n; ++k)
    parts.s_series[k + 1] =
        tilde_step(g, j0 + k, uc[g.resolve(j0 + k)] + parts.s_series[k]);

  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXi& A = g.spec.transition(j0 + k);
    const Eigen::VectorXd& u = uc[g.resolve(j0 + k)];
    for (int a = 0; a < A.rows(); ++a)
      for (int b = 0; b < A.cols(); ++b) {
        if (A(a, b) == 0) continue;
        parts.diff_bound = std::max(
            parts.diff_bound,
            std::abs(u[a] + parts.s_series[k][a] - parts.s_series[k + 1][b]));
      }
  }
  parts.remainder_bound = parts.s_series[n].cwiseAbs().maxCoeff() +
                          parts.s_series[0].cwiseAbs().maxCoeff();
  return parts;
}

double martingale_enumeration_defect(const GibbsFamily& g, const MartingaleParts& parts) {
  const int n = parts.n;
  require(n <= 12, Errc::invalid_spec, "enumeration check only runs at small horizons");
  const long j0 = g.spec.j_lo;
  const std::vector<Eigen::VectorXd> uc = centered_observables(g);
  const std::vector<std::vector<int>> words = admissible_blocks(g.spec, j0, n + 1);

  double defect = 0;
  // conditional mean of each difference given the later symbol, by summing
  // full-word masses; the decomposition promises zero
  for (int k = 0; k < n; ++k) {
    const int db = g.dim(j0 + k + 1);
    std::vector<Kahan> acc(db), mass(db);
    for (const std::vector<int>& w : words) {
      const double p = cylinder_mass(g, j0, w);
      const int a = w[k], b = w[k + 1];
      const double diff = uc[g.resolve(j0 + k)][a] + parts.s_series[k][a] -
                          parts.s_series[k + 1][b];
      acc[b].add(p * diff);
      mass[b].add(p);
    }
    for (int b = 0; b < db; ++b)
      if (mass[b].sum > 1e-300) defect = std::max(defect, std::abs(acc[b].sum / mass[b].sum));
  }
  return defect;
}

ConcentrationReport concentration_report(const GibbsFamily& g, int n, int t_points) {
  require(t_points >= 2, Errc::invalid_spec, "need at least two tail probes");
  ConcentrationReport rep;
  rep.n = n;

  const MartingaleParts parts = martingale_decompose(g, n);
  rep.diff_bound = parts.diff_bound;
  rep.remainder_bound = parts.remainder_bound;

  const ExactDistribution dist = exact_distribution(g, g.spec.j_lo, n);
  const double reach = std::max(std::abs(dist.value(0) - dist.mean),
                                std::abs(dist.value(dist.prob.size() - 1) - dist.mean));
  rep.t_grid.resize(t_points);
  rep.exact_tail.resize(t_points);
  rep.bound.resize(t_points);
  for (int i = 0; i < t_points; ++i) {
    const double t = reach * 1.05 * i / (t_points - 1);
    rep.t_grid[i] = t;
    rep.exact_tail[i] = dist.tail_abs_geq(t + rep.remainder_bound);
    if (rep.diff_bound < 1e-300)
      rep.bound[i] = t > 0 ? 0.0 : 2.0;
    else
      rep.bound[i] = 2 * std::exp(-t * t / (4 * n * rep.diff_bound));
    if (rep.exact_tail[i] > rep.bound[i] + 1e-15) ++rep.violations;
  }
  return rep;
}

// ---- cumulant growth ----------------------------------------------------------

CumulantReport cumulant_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                               int k_max, double radius, int nodes) {
  require(!n_list.empty() && k_max >= 2, Errc::invalid_spec, "bad cumulant request");
  CumulantReport rep;
  rep.j = j;
  rep.n_list = n_list;
  rep.k_max = k_max;
  rep.per_n.assign(k_max + 1, std::vector<double>(n_list.size(), 0));
  rep.variation.assign(k_max + 1, 0.0);

  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const std::vector<double> kappa = exact_cumulants(g, j, n_list[i], k_max, radius, nodes);
    for (int k = 1; k <= k_max; ++k) {
      rep.per_n[k][i] = kappa[k] / n_list[i];
      const double witness =
          std::pow(std::abs(kappa[k]) / (n_list[i] * factorial(k) * factorial(k)), 1.0 / k);
      rep.c0_fit = std::max(rep.c0_fit, witness);
    }
  }
  for (int k = 1; k <= k_max; ++k) {
    double lo = rep.per_n[k][0], hi = lo;
    for (double v : rep.per_n[k]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double denom = std::max(std::abs(lo), std::abs(hi));
    // Per-step rates below the quadrature's own noise scale carry no signal;
    // relative variation of a vanishing cumulant is reported as zero rather
    // than as noise over noise. The extraction error on kappa_k per unit n is
    // about k! eps / radius^k, independent of n.
    const double noise = 100 * factorial(k) *
                         std::numeric_limits<double>::epsilon() / std::pow(radius, k);
    rep.variation[k] = denom > noise ? (hi - lo) / denom : 0.0;
  }
  return rep;
}

// ---- large and moderate deviations --------------------------------------------

double averaged_pressure(const GibbsFamily& g, double s, const SolveOptions& opts) {
  SftFamily fam(g.spec);
  double acc = 0;
  for (int sl = 0; sl < g.window(); ++sl) {
    const RpfTriplet trip = solve_triplet(fam, g.spec.j_lo + sl, cplx(s, 0), opts);
    acc += std::log(trip.lambda.real()) - g.log_lambda0[sl];
  }
  return acc / g.window();
}

LdpReport ldp_report(const GibbsFamily& g, const LdpOptions& opts) {
  LdpReport rep;
  rep.s_cap = opts.s_cap > 0 ? opts.s_cap : 1.0;
  rep.n_list = opts.n_list;
  rep.md_probes = opts.md_probes;
  rep.md_exponent = opts.md_exponent;
  const long j = g.spec.j_lo;

  std::map<double, double> cache;
  auto pressure_at = [&](double s) {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    const double v = averaged_pressure(g, s, opts.solve);
    cache.emplace(s, v);
    return v;
  };
  const double hstep = 1e-4 * std::max(1.0, rep.s_cap);
  auto slope_at = [&](double s) {
    return (pressure_at(s + hstep) - pressure_at(s - hstep)) / (2 * hstep);
  };
  auto legendre = [&](double t) {
    double lo = -rep.s_cap, hi = rep.s_cap;
    // golden-section maximization of the concave map s -> s t - pressure(s)
    const double gr = 0.61803398874989484820;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = x1 * t - pressure_at(x1), f2 = x2 * t - pressure_at(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = x2 * t - pressure_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = x1 * t - pressure_at(x1);
      }
    }
    const double mid = (lo + hi) / 2;
    return mid * t - pressure_at(mid);
  };

  // midpoint convexity on the real grid
  {
    const int probes = 33;
    for (int i = 0; i + 2 < probes; ++i) {
      const double a = -rep.s_cap + 2 * rep.s_cap * i / (probes - 1);
      const double b = -rep.s_cap + 2 * rep.s_cap * (i + 2) / (probes - 1);
      if (pressure_at(a) + pressure_at(b) < 2 * pressure_at((a + b) / 2) - 1e-9)
        rep.convex = false;
    }
  }

  // rate function on a grid inside the reachable slope range
  const double t_hi = slope_at(0.95 * rep.s_cap);
  const double t_lo = slope_at(-0.95 * rep.s_cap);
  rep.t_grid.resize(opts.t_points);
  rep.rate.resize(opts.t_points);
  for (int i = 0; i < opts.t_points; ++i) {
    const double frac = opts.t_points == 1 ? 0.5 : static_cast<double>(i) / (opts.t_points - 1);
    rep.t_grid[i] = t_lo + (t_hi - t_lo) * (0.05 + 0.9 * frac);
    rep.rate[i] = legendre(rep.t_grid[i]);
  }

  for (int i = 0; i <= 10; ++i) {
    const double s = -0.8 * rep.s_cap + 1.6 * rep.s_cap * i / 10;
    const double t = slope_at(s);
    rep.duality_gap =
        std::max(rep.duality_gap, std::abs(legendre(t) - (s * t - pressure_at(s))));
  }

  // the limit definition, cross-checked against the per-step average at the
  // largest horizon: once through the full generating value, once through the
  // plain-vector functional
  {
    const int n = opts.n_list.back();
    for (double frac : {-0.5, -0.25, 0.25, 0.5}) {
      const double s = frac * rep.s_cap;
      const double via_mgf = log_mgf(g, j, n, cplx(s, 0)).real() / n;
      SftFamily fam(g.spec);
      ScaledProduct p = compose_scaled(fam, j, n, cplx(s, 0));
      const double inner =
          (g.nu0[g.resolve(j + n)].transpose() * (p.matrix.real() * Eigen::VectorXd::Ones(g.dim(j))))(0);
      const double via_vec = (std::log(inner) + p.log_scale - g.log_lambda_sum(j, n)) / n;
      const double avg = pressure_at(s);
      rep.pressure_gap_mgf = std::max(rep.pressure_gap_mgf, std::abs(via_mgf - avg));
      rep.pressure_gap_functional = std::max(rep.pressure_gap_functional, std::abs(via_vec - avg));
    }
  }

  // local interval probabilities and moderate-deviation tails need the exact
  // lattice table; skip silently for non-lattice observables
  const std::optional<double> sp = lattice_span(g);
  if (sp.has_value() && *sp > 0) {
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    for (int sl = 0; sl < g.window(); ++sl) {
      umin = std::min(umin, g.spec.observables[sl].minCoeff());
      umax = std::max(umax, g.spec.observables[sl].maxCoeff());
    }
    const double eps = opts.epsilon_fraction * (umax - umin);
    rep.x_probes = opts.x_probes;
    if (rep.x_probes.empty()) rep.x_probes = {2 * eps, 3 * eps};
    rep.local_gap.assign(rep.x_probes.size(), {});
    rep.md_gap.assign(rep.md_probes.size(), {});

    // The interval's minimal rate does not depend on n; hoist it. Probes are
    // deviations from the mean while the rate function lives on absolute
    // per-step values, so shift by the asymptotic mean rate.
    const double mean_rate = slope_at(0);
    std::vector<double> lbar(rep.x_probes.size(),
                             std::numeric_limits<double>::infinity());
    for (std::size_t xi = 0; xi < rep.x_probes.size(); ++xi)
      for (int i = 0; i <= 32; ++i)
        lbar[xi] = std::min(
            lbar[xi], legendre(mean_rate + rep.x_probes[xi] - eps + 2 * eps * i / 32));

    for (int n : opts.n_list) {
      const ExactDistribution dist = exact_distribution(g, j, n);
      for (std::size_t xi = 0; xi < rep.x_probes.size(); ++xi) {
        const double x = rep.x_probes[xi];
        const double p =
            dist.interval_prob(dist.mean + n * (x - eps), dist.mean + n * (x + eps));
        rep.local_gap[xi].push_back(p > 0 ? std::abs(std::log(p) / n + lbar[xi])
                                          : std::numeric_limits<double>::quiet_NaN());
      }
      const double a_n = std::pow(static_cast<double>(n), rep.md_exponent);
      for (std::size_t xi = 0; xi < rep.md_probes.size(); ++xi) {
        const double x = rep.md_probes[xi];
        const double p = dist.tail_geq(dist.mean + x * dist.sigma * a_n);
        rep.md_gap[xi].push_back(
            p > 0 ? std::abs(std::log(p) / (a_n * a_n) + x * x / 2)
                  : std::numeric_limits<double>::quiet_NaN());
      }
    }
    rep.local_decreasing = !rep.local_gap.empty();
    for (const std::vector<double>& gaps : rep.local_gap)
      if (!trend_decreasing(gaps, 0.10)) rep.local_decreasing = false;
    rep.md_decreasing = !rep.md_gap.empty();
    for (const std::vector<double>& gaps : rep.md_gap)
      if (!trend_decreasing(gaps, 0.10)) rep.md_decreasing = false;
  }
  return rep;
}

}  // namespace seqrpf

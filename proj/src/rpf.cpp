#include "seqrpf/rpf.hpp"

#include <cmath>
#include <numbers>

namespace seqrpf {

namespace {

// leading scalar at index j from the functional ratio of an (n+1)-step and an
// n-step composition anchored at the same endpoint
cplx lambda_estimate(const OperatorFamily& fam, long j, cplx z, int n, Reference ref) {
  const ScaledProduct num = compose_scaled(fam, j, n + 1, z);
  const ScaledProduct den = compose_scaled(fam, j + 1, n, z);
  const Eigen::RowVectorXcd theta = fam.reference(j + n + 1, ref);
  const cplx a = theta * num.matrix * Eigen::VectorXcd::Ones(fam.dim(j));
  const cplx b = theta * den.matrix * Eigen::VectorXcd::Ones(fam.dim(j + 1));
  require(std::abs(b) > 1e-300 && !num.rank_deficient && !den.rank_deficient,
          Errc::branch_loss, "reference functional vanished along the composition");
  return a / b * std::exp(num.log_scale - den.log_scale);
}

Eigen::RowVectorXcd dual_estimate(const OperatorFamily& fam, long j, cplx z, int n,
                                  Reference ref) {
  const ScaledProduct p = compose_scaled(fam, j, n, z);
  const Eigen::RowVectorXcd theta = fam.reference(j + n, ref);
  Eigen::RowVectorXcd w = theta * p.matrix;
  const cplx total = w.sum();
  require(std::abs(total) > 1e-300, Errc::branch_loss,
          "dual normalization vanished along the composition");
  return w / total;
}

Eigen::VectorXcd direction_estimate(const OperatorFamily& fam, long j, cplx z, int n) {
  const ScaledProduct p = compose_scaled(fam, j - n, n, z);
  Eigen::VectorXcd v = p.matrix * Eigen::VectorXcd::Ones(fam.dim(j - n));
  const double m = v.cwiseAbs().maxCoeff();
  require(m > 1e-300 && !p.rank_deficient, Errc::branch_loss,
          "direction estimate vanished along the composition");
  return v / m;
}

int effective_n0(const OperatorFamily& fam, const SolveOptions& opts) {
  if (opts.n0 > 0) return opts.n0;
  if (const auto* sft = dynamic_cast<const SftFamily*>(&fam)) {
    if (sft->spec().constants.n0 > 0) return sft->spec().constants.n0;
    const auto probed = probe_positivity_horizon(sft->spec(), 2 * sft->spec().window() + 2);
    require(probed.has_value(), Errc::non_primitive,
            "no positivity horizon found within twice the window");
    return *probed;
  }
  return 1;  // circle covers are onto, one step suffices
}

}  // namespace

RpfTriplet solve_triplet(const OperatorFamily& fam, long j, cplx z, const SolveOptions& opts) {
  const int n0 = effective_n0(fam, opts);
  require(opts.n >= 2 * n0, Errc::invalid_spec, "horizon must be at least twice n0");
  if (const auto* sft = dynamic_cast<const SftFamily*>(&fam)) {
    require(primitivity_check(sft->spec(), n0), Errc::non_primitive,
            "transition products are not strictly positive at the stated horizon");
  }
  const int n = opts.n;

  RpfTriplet t;
  t.j = j;
  t.z = z;
  t.n_used = n;
  t.nu = dual_estimate(fam, j, z, n, opts.ref);
  t.lambda = lambda_estimate(fam, j, z, n, opts.ref);
  require(std::abs(t.lambda) > opts.lambda_floor, Errc::branch_loss,
          "leading scalar collapsed below the floor");

  Eigen::VectorXcd h = direction_estimate(fam, j, z, n);
  const cplx nh = t.nu * h;
  require(std::abs(nh) > 1e-300, Errc::branch_loss, "gauge nu(h) vanished");
  t.h = h / nh;

  // neighbor data for one-step residuals
  const Eigen::RowVectorXcd nu_next = dual_estimate(fam, j + 1, z, n, opts.ref);
  Eigen::VectorXcd h_next = direction_estimate(fam, j + 1, z, n);
  const cplx nh_next = nu_next * h_next;
  require(std::abs(nh_next) > 1e-300, Errc::branch_loss, "gauge nu(h) vanished");
  h_next /= nh_next;

  const Eigen::MatrixXcd M = fam.step_matrix(j, z);
  t.eigen_residual = (M * t.h - t.lambda * h_next).cwiseAbs().maxCoeff();
  t.dual_residual = (nu_next * M - t.lambda * t.nu).cwiseAbs().sum();
  t.converged = t.eigen_residual <= opts.tol && t.dual_residual <= opts.tol;
  if (opts.enforce)
    require(t.converged, Errc::not_converged, "residuals above tolerance at the horizon");
  return t;
}

TripletFamily solve_family(const OperatorFamily& fam, cplx z, const SolveOptions& opts) {
  TripletFamily out;
  out.j_lo = fam.j_lo();
  out.z = z;
  out.slots.reserve(fam.window());
  for (int s = 0; s < fam.window(); ++s)
    out.slots.push_back(solve_triplet(fam, fam.j_lo() + s, z, opts));
  return out;
}

cplx TripletFamily::log_lambda_sum(long j, int n, const OperatorFamily& fam) const {
  cplx acc = 0;
  for (int m = 0; m < n; ++m) acc += std::log(slots[fam.resolve(j + m)].lambda);
  return acc;
}

NormalizedFamily normalize_family(const TripletFamily& at_z, const TripletFamily& at_zero,
                                  const OperatorFamily& fam, double a_floor) {
  require(at_z.window() == at_zero.window(), Errc::invalid_spec,
          "families live on different windows");
  const int w = at_z.window();
  NormalizedFamily out;
  out.j_lo = at_z.j_lo;
  out.z = at_z.z;
  out.a.resize(w);
  for (int s = 0; s < w; ++s) {
    out.a[s] = at_z.slots[s].nu * at_zero.slots[s].h;
    require(std::abs(out.a[s]) >= a_floor, Errc::branch_loss,
            "normalization scalar too close to zero");
  }
  for (int s = 0; s < w; ++s) {
    const int s1 = fam.resolve(at_z.j_lo + s + 1);
    out.tilde_lambda.push_back(out.a[s] * at_z.slots[s].lambda /
                               (out.a[s1] * at_zero.slots[s].lambda));
    const Eigen::VectorXcd& h0 = at_zero.slots[s].h;
    out.tilde_h.push_back((out.a[s] * at_z.slots[s].h.array() / h0.array()).matrix());
    out.tilde_nu.push_back(
        (at_z.slots[s].nu.array() * h0.transpose().array() / out.a[s]).matrix());
  }
  return out;
}

// ---- pressure ---------------------------------------------------------------

cplx pressure(const OperatorFamily& fam, long j, cplx z, const PressureOptions& opts) {
  const cplx lambda0 = lambda_estimate(fam, j, cplx(0, 0), opts.solve.n, opts.solve.ref);
  cplx cur_z = 0, cur_lambda = lambda0, acc = 0;

  // walk toward the target, bisecting whenever the argument turns too fast
  std::function<void(cplx, int)> advance = [&](cplx target, int depth) {
    const cplx lam = lambda_estimate(fam, j, target, opts.solve.n, opts.solve.ref);
    require(std::abs(lam) > opts.solve.lambda_floor * std::abs(lambda0), Errc::branch_loss,
            "leading scalar collapsed during continuation");
    const cplx ratio = lam / cur_lambda;
    if (std::abs(std::arg(ratio)) > opts.max_arg_step) {
      require(depth < opts.max_depth, Errc::branch_loss,
              "continuation step kept halving without settling");
      advance((cur_z + target) / 2.0, depth + 1);
      advance(target, depth + 1);
      return;
    }
    acc += std::log(ratio);
    cur_z = target;
    cur_lambda = lam;
  };
  if (z != cplx(0, 0)) advance(z, 0);
  return acc;
}

double PressureSequence::averaged(long j, int k, int n, const OperatorFamily& fam) const {
  double acc = 0;
  for (int m = 0; m < n; ++m) acc += derivs[fam.resolve(j + m)][k].real();
  return acc / n;
}

PressureSequence pressure_derivatives(const OperatorFamily& fam, int k_max, double radius,
                                      int nodes, const PressureOptions& opts) {
  require(radius > 0 && nodes >= 8, Errc::invalid_spec, "bad contour parameters");
  PressureSequence seq;
  seq.j_lo = fam.j_lo();
  seq.radius = radius;
  seq.nodes = nodes;
  seq.k_max = k_max;
  seq.derivs.resize(fam.window());

  for (int s = 0; s < fam.window(); ++s) {
    const long j = fam.j_lo() + s;
    // continue radially to the contour, then around it node to node
    std::vector<cplx> on_circle(nodes);
    const cplx lambda0 = lambda_estimate(fam, j, cplx(0, 0), opts.solve.n, opts.solve.ref);
    cplx cur_z = 0, cur_lambda = lambda0, acc = 0;
    auto step_to = [&](cplx target, int depth_start) {
      std::function<void(cplx, int)> advance = [&](cplx tgt, int depth) {
        const cplx lam = lambda_estimate(fam, j, tgt, opts.solve.n, opts.solve.ref);
        require(std::abs(lam) > opts.solve.lambda_floor * std::abs(lambda0), Errc::branch_loss,
                "leading scalar collapsed during continuation");
        const cplx ratio = lam / cur_lambda;
        if (std::abs(std::arg(ratio)) > opts.max_arg_step) {
          require(depth < opts.max_depth, Errc::branch_loss,
                  "continuation step kept halving without settling");
          advance((cur_z + tgt) / 2.0, depth + 1);
          advance(tgt, depth + 1);
          return;
        }
        acc += std::log(ratio);
        cur_z = tgt;
        cur_lambda = lam;
      };
      advance(target, depth_start);
    };
    for (int m = 0; m < nodes; ++m) {
      const double th = 2 * std::numbers::pi * m / nodes;
      step_to(radius * std::exp(cplx(0, th)), 0);
      on_circle[m] = acc;
    }

    std::vector<cplx> d(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
      cplx sum = 0;
      for (int m = 0; m < nodes; ++m) {
        const double th = 2 * std::numbers::pi * m / nodes;
        sum += on_circle[m] * std::exp(cplx(0, -k * th));
      }
      double kfac = 1;
      for (int i = 2; i <= k; ++i) kfac *= i;
      d[k] = sum / static_cast<double>(nodes) * kfac / std::pow(radius, k);
    }
    seq.quality = std::max(seq.quality, std::abs(d[0]));
    seq.derivs[s] = std::move(d);
  }
  return seq;
}

double trust_radius(const SftSpec& spec) {
  double umax = 0;
  for (const auto& u : spec.observables) umax = std::max(umax, u.cwiseAbs().maxCoeff());
  return 0.5 / (1.0 + umax);
}

double trust_radius(const CircleSpec& spec) {
  double umax = 0;
  for (const auto& u : spec.observable_modes) umax = std::max(umax, u.cwiseAbs().sum());
  return 0.5 / (1.0 + umax);
}

// ---- diagnostics ------------------------------------------------------------

ConvergenceFit convergence_rate_fit(const OperatorFamily& fam, long j, cplx z,
                                    const std::vector<int>& horizons,
                                    const std::vector<Eigen::VectorXcd>& test_functions,
                                    const SolveOptions& opts) {
  const TripletFamily fam_z = solve_family(fam, z, opts);
  ConvergenceFit out;
  out.horizons = horizons;
  const Eigen::RowVectorXcd& nu_j = fam_z.at(j, fam).nu;

  for (int n : horizons) {
    const ScaledProduct p = compose_scaled(fam, j, n, z);
    const cplx scale = std::exp(cplx(p.log_scale, 0) - fam_z.log_lambda_sum(j, n, fam));
    const Eigen::VectorXcd& h_end = fam_z.at(j + n, fam).h;
    double worst = 0;
    for (const auto& g : test_functions) {
      const Eigen::VectorXcd lhs = scale * (p.matrix * g);
      const cplx weight = nu_j * g;
      worst = std::max(worst, (lhs - weight * h_end).cwiseAbs().maxCoeff());
    }
    out.residuals.push_back(worst);
  }

  // Drop points at the floating-point floor before fitting. Long compositions
  // saturate around 1e-14 rather than machine epsilon, so the cutoff sits a
  // decade above that; genuine residuals this small carry no slope information.
  std::vector<double> xs, ys;
  const double floor_level = 1e-13;
  for (std::size_t i = 0; i < out.residuals.size(); ++i) {
    if (out.residuals[i] <= floor_level) {
      ++out.floored;
      continue;
    }
    xs.push_back(static_cast<double>(out.horizons[i]));
    ys.push_back(std::log(out.residuals[i]));
  }
  if (xs.size() < 2) {
    out.degenerate = true;
  } else {
    out.fit = fit_line(xs, ys);
  }
  return out;
}

std::vector<StabilityRow> stability_sweep(const SftSpec& spec, const std::vector<double>& deltas,
                                          double probe_radius, std::uint64_t seed,
                                          const SolveOptions& opts) {
  validate(spec);
  require(spec.memory == 1, Errc::invalid_spec, "memory-1 spec required; recode first");

  // fixed noise direction, scaled by delta, so responses are comparable
  SftSpec noise_f = spec, noise_u = spec;
  randomize_potentials(noise_f, -1, 1, derive_stream(seed, 11));
  randomize_observables(noise_u, -1, 1, derive_stream(seed, 12));

  std::vector<cplx> probes{cplx(0, 0), cplx(probe_radius, 0), cplx(-probe_radius, 0),
                           cplx(0, probe_radius), cplx(0, -probe_radius)};

  const SftFamily base(spec);
  std::vector<TripletFamily> base_fams;
  for (cplx z : probes) base_fams.push_back(solve_family(base, z, opts));

  std::vector<StabilityRow> rows;
  for (double delta : deltas) {
    SftSpec pert = spec;
    for (int s = 0; s < spec.window(); ++s) {
      pert.potentials[s] += delta * noise_f.potentials[s];
      pert.observables[s] += delta * noise_u.observables[s];
    }
    pert.constants.B = 0;  // bound changed; rederive
    const SftFamily fam_p(pert);
    StabilityRow row;
    row.delta = delta;
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      const TripletFamily tp = solve_family(fam_p, probes[pi], opts);
      for (int s = 0; s < spec.window(); ++s) {
        const auto& a = base_fams[pi].slots[s];
        const auto& b = tp.slots[s];
        row.dlambda = std::max(row.dlambda, std::abs(a.lambda - b.lambda));
        row.dh = std::max(row.dh, (a.h - b.h).cwiseAbs().maxCoeff());
        row.dnu = std::max(row.dnu, (a.nu - b.nu).cwiseAbs().sum());
      }
    }
    rows.push_back(row);
  }
  return rows;
}

SftSpec with_conformal_potentials(const SftSpec& spec,
                                  const std::vector<Eigen::VectorXd>& m_family) {
  validate(spec);
  require(spec.memory == 1, Errc::invalid_spec, "memory-1 spec required");
  require(static_cast<int>(m_family.size()) == spec.window(), Errc::invalid_spec,
          "one probability vector per window slot required");
  for (int s = 0; s < spec.window(); ++s) {
    require(m_family[s].size() == spec.alphabet_sizes[s], Errc::invalid_spec,
            "probability vector length mismatch");
    require((m_family[s].array() > 0).all(), Errc::invalid_spec,
            "probability vectors must be strictly positive");
    require(std::abs(m_family[s].sum() - 1.0) < 1e-9, Errc::invalid_spec,
            "probability vector does not sum to one");
  }
  SftSpec out = spec;
  for (int s = 0; s < spec.window(); ++s) {
    const long j = spec.j_lo + s;
    const auto& A = spec.transition(j);
    const auto& m_next = m_family[spec.resolve(j + 1)];
    for (int a = 0; a < A.rows(); ++a) {
      double reach = 0;
      for (int b = 0; b < A.cols(); ++b)
        if (A(a, b) == 1) reach += m_next[b];
      out.potentials[s][a] = std::log(m_family[s][a]) - std::log(reach);
    }
  }
  out.constants.B = 0;
  return out;
}

NonsingularReport nonsingular_check(const SftSpec& spec,
                                    const std::vector<Eigen::VectorXd>& m_family,
                                    const SolveOptions& opts) {
  const SftSpec conf = with_conformal_potentials(spec, m_family);
  const SftFamily fam(conf);
  const TripletFamily t0 = solve_family(fam, cplx(0, 0), opts);
  NonsingularReport rep;
  for (int s = 0; s < fam.window(); ++s) {
    rep.max_lambda_gap = std::max(rep.max_lambda_gap, std::abs(t0.slots[s].lambda - 1.0));
    const Eigen::RowVectorXcd& nu = t0.slots[s].nu;
    for (int a = 0; a < nu.size(); ++a)
      rep.max_nu_gap = std::max(rep.max_nu_gap, std::abs(nu[a] - m_family[s][a]));
  }
  return rep;
}

}  // namespace seqrpf

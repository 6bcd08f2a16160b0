#pragma once

#include "seqrpf/circle.hpp"
#include "seqrpf/operators.hpp"

namespace seqrpf {

// One solved eigendata triple at a fixed index and parameter: leading scalar
// lambda, positive direction h (normalized so nu(h) = 1), dual functional nu
// (normalized so nu(1) = 1). Residuals measure how far the triple is from an
// exact one-step intertwining, in sup norm for h and total variation for nu.
struct RpfTriplet {
  long j = 0;
  cplx z{0, 0};
  cplx lambda{0, 0};
  Eigen::VectorXcd h;
  Eigen::RowVectorXcd nu;
  int n_used = 0;
  double eigen_residual = 0;
  double dual_residual = 0;
  bool converged = false;
};

struct SolveOptions {
  int n = 96;                  // composition horizon driving the limits
  double tol = 1e-8;           // residual demand when enforce is set
  Reference ref = Reference::point_eval;
  bool enforce = true;         // throw not_converged instead of flagging
  double lambda_floor = 1e-10; // below this |lambda| the branch is considered lost
  int n0 = 0;                  // positivity horizon; 0 = probe
};

RpfTriplet solve_triplet(const OperatorFamily& fam, long j, cplx z, const SolveOptions& opts);

// triplets for every window slot at one parameter value
struct TripletFamily {
  long j_lo = 0;
  cplx z{0, 0};
  std::vector<RpfTriplet> slots;

  int window() const { return static_cast<int>(slots.size()); }
  const RpfTriplet& at_slot(int s) const { return slots[s]; }
  const RpfTriplet& at(long j, const OperatorFamily& fam) const {
    return slots[fam.resolve(j)];
  }
  // sum of principal logs of per-step lambdas over [j, j+n); exponentiating
  // recovers the composition's leading growth exactly
  cplx log_lambda_sum(long j, int n, const OperatorFamily& fam) const;
};

TripletFamily solve_family(const OperatorFamily& fam, cplx z, const SolveOptions& opts);

// Gauge-adjusted family making the parameter-z data comparable with the z=0
// one: scalars a_j = nu_j^z(h_j^0), step scalars tilde_lambda with unit value
// at z=0, h and nu rescaled entrywise. At z=0 the adjusted dual equals the
// invariant marginal h .* nu.
struct NormalizedFamily {
  long j_lo = 0;
  cplx z{0, 0};
  std::vector<cplx> a;
  std::vector<cplx> tilde_lambda;
  std::vector<Eigen::VectorXcd> tilde_h;
  std::vector<Eigen::RowVectorXcd> tilde_nu;
};

NormalizedFamily normalize_family(const TripletFamily& at_z, const TripletFamily& at_zero,
                                  const OperatorFamily& fam, double a_floor = 1e-6);

// ---- pressure ---------------------------------------------------------------

struct PressureOptions {
  SolveOptions solve;
  double max_arg_step = 0.785398163397448;  // pi/4, halve the step beyond this
  int max_depth = 40;
};

// log lambda_j(z) - log lambda_j(0) by analytic continuation along [0, z]
cplx pressure(const OperatorFamily& fam, long j, cplx z, const PressureOptions& opts);

// derivative tables at z=0 for every slot, via trapezoid contour quadrature
// on |z| = radius with `nodes` points
struct PressureSequence {
  long j_lo = 0;
  double radius = 0;
  int nodes = 0;
  int k_max = 0;
  std::vector<std::vector<cplx>> derivs;  // [slot][k], k = 0..k_max (k=0 is a quality probe)
  double quality = 0;                     // max |k=0 coefficient|, should be ~0

  double derivative(long j, int k, const OperatorFamily& fam) const {
    return derivs[fam.resolve(j)][k].real();
  }
  // (1/n) sum_{m<n} derivative(j+m, k)
  double averaged(long j, int k, int n, const OperatorFamily& fam) const;
};

PressureSequence pressure_derivatives(const OperatorFamily& fam, int k_max, double radius,
                                      int nodes, const PressureOptions& opts);

// largest parameter radius the branch continuation treats as safe
double trust_radius(const SftSpec& spec);
double trust_radius(const CircleSpec& spec);

// ---- diagnostics ------------------------------------------------------------

struct ConvergenceFit {
  std::vector<int> horizons;
  std::vector<double> residuals;  // worst case over the supplied test functions
  LineFit fit;                    // log residual vs horizon; slope = log of the rate
  int floored = 0;                // points at the floating-point floor, excluded
  bool degenerate = false;        // too few live points to fit
};

ConvergenceFit convergence_rate_fit(const OperatorFamily& fam, long j, cplx z,
                                    const std::vector<int>& horizons,
                                    const std::vector<Eigen::VectorXcd>& test_functions,
                                    const SolveOptions& opts);

struct StabilityRow {
  double delta = 0;
  double dlambda = 0;  // max over slots and probe parameters
  double dh = 0;       // sup norm
  double dnu = 0;      // total variation
};

// response of the triple to bounded seeded noise of size delta on f and u,
// probed on a small parameter grid inside the trust disk
std::vector<StabilityRow> stability_sweep(const SftSpec& spec, const std::vector<double>& deltas,
                                          double probe_radius, std::uint64_t seed,
                                          const SolveOptions& opts);

// potentials making the operator's adjoint fix the given probability family
SftSpec with_conformal_potentials(const SftSpec& spec,
                                  const std::vector<Eigen::VectorXd>& m_family);

struct NonsingularReport {
  double max_lambda_gap = 0;  // max_j |lambda_j - 1|
  double max_nu_gap = 0;      // max_j ||nu_j - m_j||_inf
};

NonsingularReport nonsingular_check(const SftSpec& spec,
                                    const std::vector<Eigen::VectorXd>& m_family,
                                    const SolveOptions& opts);

}  // namespace seqrpf

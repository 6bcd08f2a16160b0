#pragma once

#include "seqrpf/limits.hpp"

namespace seqrpf {

// One environment state: a complete layer over the shared alphabet. The
// realized system at time t is the layer picked by the driver at t.
struct EnvLayer {
  Eigen::MatrixXi transition;
  Eigen::VectorXd potential;
  Eigen::VectorXd observable;
};

enum class DriverKind { independent, markov };

// Layer-selection process. Distributions and kernels are reused periodically
// past their window.
struct EnvDriver {
  DriverKind kind = DriverKind::independent;
  std::vector<Eigen::VectorXd> probs;      // independent: per-time distribution
  Eigen::VectorXd initial;                 // markov: time-0 distribution
  std::vector<Eigen::MatrixXd> kernels;    // markov: per-time row-stochastic kernels
};

struct EnvSpec {
  std::vector<EnvLayer> layers;
  EnvDriver driver;
  std::vector<int> marked;   // reference cycle of layer indices, in order
  long window_len = 64;
  int n0 = 2;                // primitivity horizon demanded of layer compositions
};

// checks layer shapes, driver stochasticity, and that every layer sequence the
// driver can produce has an all-positive transition product within n0 steps
void validate(const EnvSpec& env);

// effective one-step driver kernel at time t (independent drivers read as
// kernels with identical rows)
Eigen::MatrixXd driver_kernel(const EnvSpec& env, long t);
Eigen::VectorXd driver_marginal(const EnvSpec& env, long t);

struct Realization {
  std::uint64_t seed = 0;
  std::vector<int> path;        // layer index per time
  SftSpec spec;                 // induced system, periodic reuse past the window
  std::vector<long> marked_hits;  // times where the marked cycle starts on the path
};

Realization realize(const EnvSpec& env, std::uint64_t seed, long len);

struct PhiMixingReport {
  std::vector<int> n_list;
  std::vector<double> phi;          // sup over origins and states of conditional-vs-marginal TV
  std::vector<double> partial_sums;
};

// exact mixing coefficients of the driver chain; origins scanned over
// min(window_len, 512) starting times
PhiMixingReport phi_mixing_exact(const EnvSpec& env, const std::vector<int>& n_list);

struct PropGrowthReport {
  int s = 1;
  std::vector<long> n_list;
  std::vector<double> block_sum;   // sum over m < n of the exact marked-block probability
  std::vector<double> ratio;       // block_sum / sqrt(n ln n)
  bool compliant = false;          // some block has positive probability
  bool diverging = false;          // ratio grows along the list
};

PropGrowthReport propgrowth_report(const EnvSpec& env, int s, const std::vector<long>& n_list);

struct EnvLltReport {
  Realization real;
  GenPerReport blocks;   // includes the reference-loop spectral radii over the t grid
  LltReport llt;
};

EnvLltReport env_llt_pipeline(const EnvSpec& env, std::uint64_t seed, double t_lo, double t_hi,
                              int t_points, int s, double delta0,
                              const std::vector<long>& block_n, const std::vector<int>& llt_n,
                              const SolveOptions& opts);

struct PressureConcentration {
  double z = 0;
  std::vector<int> n_list;
  std::vector<double> mean_pressure;  // cross-seed mean of the running pressure average
  std::vector<double> deviation;      // cross-seed mean absolute deviation
  LineFit fit;                        // log deviation vs log n
  double locality_gap = 0;            // worst change when the realization is cut to [j, j+horizon]
};

PressureConcentration pressure_concentration_report(const EnvSpec& env, double z,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    const std::vector<int>& n_list,
                                                    const SolveOptions& opts);

struct DeterministicHReport {
  double layer_defect = 0;    // worst adjoint-fixing defect across layers
  double max_h_gap = 0;       // sup over seeds and indices against the reference direction
  double max_lambda_gap = 0;  // sup |lambda_j - 1|
  double max_nu_gap = 0;      // sup ||nu_j - m||_inf
  bool passed = false;
};

// environments whose layers all fix the measure m must produce one h across
// seeds and indices; throws precondition_failed when a layer breaks the
// adjoint-fixing identity
DeterministicHReport deterministic_h_check(const EnvSpec& env, const Eigen::VectorXd& m,
                                           const std::vector<std::uint64_t>& seeds,
                                           const SolveOptions& opts, double tol = 1e-8);

}  // namespace seqrpf

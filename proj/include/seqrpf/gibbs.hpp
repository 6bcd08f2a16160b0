#pragma once

#include "seqrpf/rpf.hpp"

namespace seqrpf {

// The measure family carried by the z=0 triplets: marginals h .* nu, the
// induced one-step Markov kernels, and the per-step growth scalars. Everything
// downstream (cylinder masses, sampling, mixing, exact distributions) reads
// from here so the one solve is shared.
struct GibbsFamily {
  SftSpec spec;
  TripletFamily t0;
  std::vector<Eigen::MatrixXd> steps0;      // real step matrices at z=0, per slot
  std::vector<Eigen::VectorXd> h0;
  std::vector<Eigen::VectorXd> nu0;
  std::vector<Eigen::VectorXd> marginals;   // probability vectors, strictly positive
  std::vector<double> log_lambda0;
  std::vector<Eigen::MatrixXd> kernels;     // row-stochastic, shape d_j x d_{j+1}
  double kernel_defect = 0;                 // worst row-sum deviation before normalization

  int window() const { return spec.window(); }
  int resolve(long j) const { return spec.resolve(j); }
  int dim(long j) const { return spec.dim(j); }
  const Eigen::MatrixXd& kernel(long j) const { return kernels[resolve(j)]; }
  const Eigen::VectorXd& marginal(long j) const { return marginals[resolve(j)]; }
  double log_lambda_sum(long j, int n) const;

  // mean of a depth-1 observable under the time-j marginal
  double mean(long j, const Eigen::VectorXd& v) const { return marginal(j).dot(v); }
};

GibbsFamily build_gibbs(const SftSpec& spec, const SolveOptions& opts);

// measure of the cylinder fixing word[0..r] at indices j..j+r; zero when the
// word is inadmissible
double cylinder_mass(const GibbsFamily& g, long j, const std::vector<int>& word);

// n-step kernel product starting at index j (d_j x d_{j+n})
Eigen::MatrixXd kernel_product(const GibbsFamily& g, long j, int n);

// in place: subtract the per-index mean of the observable; means already at
// rounding level are left untouched so the operation is idempotent bit for bit
void center_observables(GibbsFamily& g);

struct PathBatch {
  long j = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> paths;  // paths[i][t] = symbol at index j+t
};

// `count` admissible paths of length `len`, each from its own derived stream
PathBatch sample_paths(const GibbsFamily& g, long j, int len, int count, std::uint64_t seed);

double correlation(const GibbsFamily& g, long j, const Eigen::VectorXd& obs_now,
                   const Eigen::VectorXd& obs_later, int n);

ConvergenceFit correlation_decay_check(const GibbsFamily& g, long j,
                                       const Eigen::VectorXd& obs_now,
                                       const Eigen::VectorXd& obs_later,
                                       const std::vector<int>& n_list);

struct MixingReport {
  std::vector<int> gaps;
  std::vector<double> psi;
  LineFit fit;          // log psi vs gap on live points
  double c_fit = 0;     // exp(intercept)
  double delta_fit = 0; // exp(slope)
  int floored = 0;
  bool degenerate = false;
};

// uniform dependence coefficient over cylinder pairs separated by each gap:
// sup |mu(A and B) - mu(A) mu(B)| / (mu(A) mu(B)) for A, B of rank <= r_max.
// The ratio depends on a pair only through the symbols adjacent to the gap,
// so the enumeration tracks reachable endpoint pairs instead of whole words.
MixingReport psi_mixing_report(const GibbsFamily& g, int r_max, const std::vector<int>& gaps);

struct GibbsBand {
  double lower = 0;  // C_1
  double upper = 0;  // C_2
};

// envelope of cylinder_mass / exp(S f - sum log lambda) over words of length
// <= max_len starting anywhere in the window
GibbsBand gibbs_ratio_band(const GibbsFamily& g, int max_len);

}  // namespace seqrpf

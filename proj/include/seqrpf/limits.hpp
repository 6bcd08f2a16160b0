#pragma once

#include <optional>

#include "seqrpf/gibbs.hpp"

namespace seqrpf {

// ---- Birkhoff sums, exactly -------------------------------------------------

// common lattice step of all observable values: 0 when the observable
// vanishes, nullopt when no step reproduces every value to relative 1e-9
std::optional<double> lattice_span(const GibbsFamily& g, double tol = 1e-9);

// distribution of S_{j,n}u for lattice-valued u, by dynamic programming over
// (accumulated value, current symbol)
struct ExactDistribution {
  long j = 0;
  int n = 0;
  double span = 1;
  double origin = 0;                // value of bin 0
  std::vector<double> prob;
  double mean = 0;
  double variance = 0;
  double sigma = 0;

  double value(std::size_t i) const { return origin + static_cast<double>(i) * span; }
  double cdf(double x) const;       // P(S <= x)
  double tail_geq(double x) const;  // P(S >= x)
  double tail_abs_geq(double x) const;  // P(|S - mean| >= x)
  double interval_prob(double lo, double hi) const;  // P(lo <= S <= hi)
};

ExactDistribution exact_distribution(const GibbsFamily& g, long j, int n,
                                     std::size_t state_cap = std::size_t(1) << 25);

// moment generating value mu_j(exp(z S_{j,n}u)) from operator compositions
cplx exact_mgf(const GibbsFamily& g, long j, int n, cplx z);

// cumulants of S_{j,n}u from the log of the generating function on a circle
// |z| = radius, branch tracked around the contour. Entry k holds the k-th
// cumulant for 1 <= k <= k_max; entry 0 holds the constant coefficient, a
// quality probe that should sit at rounding level.
std::vector<double> exact_cumulants(const GibbsFamily& g, long j, int n, int k_max,
                                    double radius, int nodes = 128);

// ---- moment asymptotics -----------------------------------------------------

// normalized-moment constants: even orders match the Gaussian pattern, odd
// orders pick up one third-derivative factor
double moment_constant_even(int k);        // 2^{-k/2} k! / (k/2)!
double moment_constant_odd(int k);         // (k!/3!) 2^{-(k-3)/2} / ((k-3)/2)!

struct MomentReport {
  long j = 0;
  std::vector<int> n_list;
  int k_max = 0;
  // normalized central moments gamma[k][i] = E[(S-ES)^k] / n^{floor(k/2)}
  std::vector<std::vector<double>> gamma;
  std::vector<std::vector<double>> predicted;   // limit value per (k, n)
  std::vector<std::vector<double>> gap;         // |gamma - predicted|
  std::vector<LineFit> gap_fit;                 // log gap vs log n, per k >= 2
  std::vector<double> mean_gap;                 // |E S - sum of first derivatives|
  double pi2 = 0, pi3 = 0;                      // averaged second/third derivatives
};

MomentReport moments_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                            int k_max, const SolveOptions& opts);

// ---- coboundary / variance dichotomy ---------------------------------------

struct CoboundaryWitness {
  std::vector<Eigen::VectorXd> w;   // witness per window slot
  double residual = 0;              // worst |u - (W next - W)| over admissible pairs
  double tail_estimate = 0;         // bound on the discarded series tail
  int horizon = 0;
};

CoboundaryWitness coboundary_solve(const GibbsFamily& g, int horizon, double tail_tol = 1e-10);

enum class VarianceClass { bounded, linear };

struct VarianceGrowth {
  std::vector<int> n_list;
  std::vector<double> variance;
  VarianceClass cls = VarianceClass::linear;
  double rate = 0;         // variance/n at the largest n
  double sup_variance = 0;
};

VarianceGrowth variance_growth(const GibbsFamily& g, long j, const std::vector<int>& n_list);

// ---- central limit behaviour -------------------------------------------------

struct CltReport {
  long j = 0;
  std::vector<int> n_list;
  std::vector<double> sigma;
  std::vector<double> dn;          // Kolmogorov distance to the standard normal
  std::vector<double> esseen;      // certified smoothing-integral upper bound
  std::vector<double> root_n_dn;
  double band_ratio = 0;           // max/min of sqrt(n) D_n
  double c_fit = 0;                // geometric mean of sqrt(n) D_n
  bool sampled = false;            // distances estimated from sampled paths
  bool degenerate = false;         // variance vanished, distances skipped
};

struct CltOptions {
  int cf_points = 4096;        // quadrature intervals for the smoothing integral
  int sample_paths = 1000000;  // only used on non-lattice observables
  std::uint64_t seed = 1;
};

CltReport berry_esseen_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                              const CltOptions& opts = {});

struct LltReport {
  long j = 0;
  double span = 0;
  double c0 = 0;                  // variance growth floor that was verified
  std::vector<int> n_list;
  std::vector<double> sigma;
  std::vector<double> gap;        // sup over atoms of the local gaussian mismatch
  bool decreasing = false;        // allowing 10% backslide per step
};

LltReport llt_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                     double c0 = 1e-3);

// sup over t in [t_lo, t_hi] of ||L_{it}^{0,n}|| / lambda_{0,n}(0), scaled by
// sqrt(n); the aperiodicity hypothesis demands this to vanish
struct CfDecayScan {
  std::vector<double> t_grid;
  std::vector<int> n_list;
  std::vector<double> sup_ratio;    // per n, already scaled by sqrt(n)
  bool vanishing = false;
};

CfDecayScan cf_decay_scan(const GibbsFamily& g, double t_lo, double t_hi, int t_points,
                          const std::vector<int>& n_list);

// ---- block counting against a periodic reference loop ------------------------

struct GenPerReport {
  std::vector<long> n_list;
  std::vector<long> counts;        // matching blocks among the first n
  std::vector<double> ratio;       // counts / ln n
  double norm_bound = 0;           // observed sup of composition norms
  bool ratio_increasing = false;
  std::vector<double> t_grid;
  std::vector<double> rho;         // spectral radius of the reference loop per t
  double rho_max = 0;
};

// counts m < n with ||L_it^{m, s m0} - Loop_it^s|| small uniformly on the t
// grid, compositions normalized by their z=0 growth
GenPerReport genper_block_count(const GibbsFamily& realized, const SftSpec& loop_spec,
                                double t_lo, double t_hi, int t_points, int s, double delta0,
                                const std::vector<long>& n_list, const SolveOptions& opts);

// ---- martingale approximation and concentration ------------------------------

struct MartingaleParts {
  int n = 0;
  // s_series[k] for k = 0..n: function of the symbol at time k, summing the
  // conditional expectations of all earlier centered observables given x_k.
  // Difference j of the martingale (revealing x_{n-j}) reads
  //   u(x_{n-j}) + s_series[n-j](x_{n-j}) - s_series[n-j+1](x_{n-j+1})
  // and the recursion s_{k+1} = step(u_k + s_k) makes the conditional means
  // vanish at rounding level no matter how the k=0 seed was truncated.
  std::vector<Eigen::VectorXd> s_series;
  double diff_bound = 0;       // C: sup over differences
  double remainder_bound = 0;  // C1: sup |S - ES - martingale|
};

MartingaleParts martingale_decompose(const GibbsFamily& g, int n);

// exact conditional-expectation defect of the decomposition, by enumeration
// over backward kernels; n must stay small
double martingale_enumeration_defect(const GibbsFamily& g, const MartingaleParts& parts);

struct ConcentrationReport {
  int n = 0;
  double diff_bound = 0;
  double remainder_bound = 0;
  std::vector<double> t_grid;
  std::vector<double> exact_tail;   // P(|S - ES| >= t + C1)
  std::vector<double> bound;        // 2 exp(-t^2 / (4 n C))
  int violations = 0;
};

ConcentrationReport concentration_report(const GibbsFamily& g, int n, int t_points);

// ---- cumulant growth ----------------------------------------------------------

struct CumulantReport {
  long j = 0;
  std::vector<int> n_list;
  int k_max = 0;
  std::vector<std::vector<double>> per_n;      // kappa[k][i] = Gamma_k(n_i) / n_i
  std::vector<double> variation;               // per k: max/min spread of kappa over n
  double c0_fit = 0;                           // witness for |Gamma_k| <= n (k!)^2 c0^k
};

CumulantReport cumulant_report(const GibbsFamily& g, long j, const std::vector<int>& n_list,
                               int k_max, double radius, int nodes = 128);

// ---- large and moderate deviations --------------------------------------------

struct LdpReport {
  double s_cap = 0;                       // Legendre search radius
  std::vector<double> t_grid;
  std::vector<double> rate;               // Legendre transform at each t
  double pressure_gap_mgf = 0;            // vs (1/n) log mu(e^{sS}) at the largest n
  double pressure_gap_functional = 0;     // vs (1/n) log of the reference functional route
  bool convex = true;
  double duality_gap = 0;
  std::vector<int> n_list;
  std::vector<double> x_probes;
  std::vector<std::vector<double>> local_gap;  // [probe][n]
  bool local_decreasing = false;
  std::vector<double> md_probes;
  std::vector<std::vector<double>> md_gap;     // [probe][n]
  bool md_decreasing = false;
  double md_exponent = 0.1;               // a_n = n^exponent
};

struct LdpOptions {
  double s_cap = 0;            // 0 = trust radius of the centered system
  int t_points = 21;
  std::vector<int> n_list{256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<double> x_probes;   // empty = pick small interior points
  double epsilon_fraction = 0.05; // interval half-width as a fraction of the range
  std::vector<double> md_probes{1.0, 1.5};
  double md_exponent = 0.1;
  SolveOptions solve;
};

// averaged pressure over the window at real parameter s
double averaged_pressure(const GibbsFamily& g, double s, const SolveOptions& opts);

LdpReport ldp_report(const GibbsFamily& g, const LdpOptions& opts);

}  // namespace seqrpf

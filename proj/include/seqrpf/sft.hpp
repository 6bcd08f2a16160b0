#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "seqrpf/common.hpp"

namespace seqrpf {

// How indices outside the declared window are resolved. Periodic wraps the
// window into a loop; frozen repeats the boundary columns forever.
enum class Extension { periodic, frozen };

struct AssumptionConstants {
  double B = 0;     // sup-norm bound on potentials/observables; 0 = derive from data
  int n0 = 0;       // positivity horizon; 0 = probe for the smallest one
  double alpha = 1; // regularity exponent of the symbolic metric
};

// A time-dependent subshift of finite type on a finite index window
// [j_lo, j_hi], with one alphabet, transition matrix, potential and
// observable per index. transitions[s] has shape d_s x d_{s+1} (row = source
// symbol, column = target symbol). With memory k > 1 the potential and
// observable at index j are tables over k-tuples (row-major, first symbol
// slowest); recode_to_memory_one turns such a spec into an equivalent
// memory-1 spec on block alphabets.
struct SftSpec {
  long j_lo = 0;
  long j_hi = 0;
  std::vector<int> alphabet_sizes;
  std::vector<Eigen::MatrixXi> transitions;
  std::vector<Eigen::VectorXd> potentials;
  std::vector<Eigen::VectorXd> observables;
  int memory = 1;
  Extension extension = Extension::periodic;
  AssumptionConstants constants;

  int window() const { return static_cast<int>(j_hi - j_lo + 1); }

  // window slot for an arbitrary integer time index
  int resolve(long j) const {
    const long w = j_hi - j_lo + 1;
    if (extension == Extension::periodic) {
      long r = (j - j_lo) % w;
      if (r < 0) r += w;
      return static_cast<int>(r);
    }
    if (j < j_lo) return 0;
    if (j > j_hi) return static_cast<int>(w - 1);
    return static_cast<int>(j - j_lo);
  }

  int dim(long j) const { return alphabet_sizes[resolve(j)]; }
  const Eigen::MatrixXi& transition(long j) const { return transitions[resolve(j)]; }
  const Eigen::VectorXd& potential(long j) const { return potentials[resolve(j)]; }
  const Eigen::VectorXd& observable(long j) const { return observables[resolve(j)]; }

  // expected table length for a depth-`memory` function based at index j
  long tuple_count(long j) const {
    long c = 1;
    for (int i = 0; i < memory; ++i) c *= dim(j + i);
    return c;
  }
};

// structural checks: shapes, 0/1 entries, no dead rows or columns, extension
// compatibility at the window edge. Throws Error(invalid_spec).
void validate(const SftSpec& spec);

// true when every length-n0 transition product starting in the window is
// strictly positive
bool primitivity_check(const SftSpec& spec, int n0);

// smallest n0 <= limit that makes primitivity_check pass, if any
std::optional<int> probe_positivity_horizon(const SftSpec& spec, int limit);

// memory-k spec -> memory-1 spec whose alphabet at index j is the set of
// admissible k-blocks starting at j, in lexicographic order
SftSpec recode_to_memory_one(const SftSpec& spec);

// admissible k-blocks starting at j, each block a vector of k symbols
std::vector<std::vector<int>> admissible_blocks(const SftSpec& spec, long j, int k);

// ---- ready-made systems (used by tests and seeded experiments) -------------

SftSpec make_full_shift(int symbols, long window_len, Extension ext = Extension::periodic);
SftSpec make_golden_mean(long window_len, Extension ext = Extension::periodic);

// fills potentials/observables with per-index seeded uniform values
void randomize_potentials(SftSpec& spec, double lo, double hi, std::uint64_t seed);
void randomize_observables(SftSpec& spec, double lo, double hi, std::uint64_t seed);

// random primitive spec: alphabet sizes constant d, transitions drawn with
// density >= 1/2 and retried until 2-step products are positive
SftSpec make_seeded_primitive(int d, long window_len, double f_amp, double u_amp,
                              std::uint64_t seed);

}  // namespace seqrpf

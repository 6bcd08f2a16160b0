#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqrpf {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";

// Failure classes surfaced to callers and mapped to CLI exit codes.
// config_error means the input text was rejected before any computation.
enum class Errc {
  invalid_spec,
  non_primitive,
  branch_loss,
  not_converged,
  fit_degenerate,
  horizon_insufficient,
  state_cap_exceeded,
  variance_too_small,
  invalid_driver,
  precondition_failed,
  config_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

// ---- deterministic randomness ----------------------------------------------
//
// All stochastic work draws from mt19937_64 streams derived from a user seed
// and a stream index, so results are reproducible byte-for-byte regardless of
// scheduling. Distribution helpers are hand-rolled: the standard ones are
// implementation-defined and would break cross-machine determinism.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ab5e1ull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // uniform in [0,1) with 53-bit resolution
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inverse-CDF draw from a finite distribution (weights need not be normalized)
  int pick(const std::vector<double>& w) {
    double total = 0;
    for (double x : w) total += x;
    double target = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (target < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// ---- small numerics ---------------------------------------------------------

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int points = 0;
};

// least squares y = a + b x; callers pass already-transformed coordinates
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// FNV-1a over bytes; stable across platforms, used for config hashes
std::uint64_t fnv1a(const std::string& bytes);

std::string hex64(std::uint64_t v);

// run fn(i) for i in [0,count) on `jobs` threads; each index writes only its
// own slot in the caller's output, so the result is independent of scheduling
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace seqrpf

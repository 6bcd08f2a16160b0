#include "seqrpf/sft.hpp"

#include <algorithm>
#include <cmath>

namespace seqrpf {

void validate(const SftSpec& spec) {
  require(spec.j_hi >= spec.j_lo, Errc::invalid_spec, "window is empty");
  const int w = spec.window();
  require(static_cast<int>(spec.alphabet_sizes.size()) == w &&
              static_cast<int>(spec.transitions.size()) == w &&
              static_cast<int>(spec.potentials.size()) == w &&
              static_cast<int>(spec.observables.size()) == w,
          Errc::invalid_spec, "per-index data does not match window length");
  require(spec.memory >= 1, Errc::invalid_spec, "memory must be >= 1");
  for (int s = 0; s < w; ++s) {
    const long j = spec.j_lo + s;
    require(spec.alphabet_sizes[s] >= 1, Errc::invalid_spec, "alphabet is empty");
    const auto& A = spec.transitions[s];
    require(A.rows() == spec.dim(j) && A.cols() == spec.dim(j + 1), Errc::invalid_spec,
            "transition shape does not match alphabets (check the extension mode)");
    for (int r = 0; r < A.rows(); ++r)
      for (int c = 0; c < A.cols(); ++c)
        require(A(r, c) == 0 || A(r, c) == 1, Errc::invalid_spec, "transitions must be 0/1");
    require((A.rowwise().sum().array() > 0).all(), Errc::invalid_spec,
            "transition row without successor");
    require((A.colwise().sum().array() > 0).all(), Errc::invalid_spec,
            "transition column without predecessor");
    require(spec.potentials[s].size() == spec.tuple_count(j) &&
                spec.observables[s].size() == spec.tuple_count(j),
            Errc::invalid_spec, "potential/observable length does not match depth");
  }
  if (spec.constants.B > 0) {
    for (int s = 0; s < w; ++s) {
      const double m = std::max(spec.potentials[s].cwiseAbs().maxCoeff(),
                                spec.observables[s].cwiseAbs().maxCoeff());
      require(m <= spec.constants.B + 1e-12, Errc::invalid_spec,
              "potential exceeds declared bound");
    }
  }
}

bool primitivity_check(const SftSpec& spec, int n0) {
  if (n0 < 1) return false;
  for (int s = 0; s < spec.window(); ++s) {
    const long j = spec.j_lo + s;
    Eigen::MatrixXi P = spec.transition(j);
    for (int m = 1; m < n0; ++m) {
      P = (P * spec.transition(j + m)).cwiseMin(1);
    }
    if (!(P.array() > 0).all()) return false;
  }
  return true;
}

std::optional<int> probe_positivity_horizon(const SftSpec& spec, int limit) {
  for (int n0 = 1; n0 <= limit; ++n0)
    if (primitivity_check(spec, n0)) return n0;
  return std::nullopt;
}

std::vector<std::vector<int>> admissible_blocks(const SftSpec& spec, long j, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> word(k);
  // depth-first walk over the transition graph
  std::function<void(int)> walk = [&](int depth) {
    if (depth == k) {
      out.push_back(word);
      return;
    }
    for (int a = 0; a < spec.dim(j + depth); ++a) {
      if (depth > 0 && spec.transition(j + depth - 1)(word[depth - 1], a) == 0) continue;
      word[depth] = a;
      walk(depth + 1);
    }
  };
  walk(0);
  return out;
}

namespace {

long tuple_index(const SftSpec& spec, long j, const std::vector<int>& word) {
  long idx = 0;
  for (std::size_t i = 0; i < word.size(); ++i) idx = idx * spec.dim(j + i) + word[i];
  return idx;
}

}  // namespace

SftSpec recode_to_memory_one(const SftSpec& spec) {
  validate(spec);
  const int k = spec.memory;
  if (k == 1) return spec;
  const int w = spec.window();

  SftSpec out;
  out.j_lo = spec.j_lo;
  out.j_hi = spec.j_hi;
  out.memory = 1;
  out.extension = spec.extension;
  out.constants = spec.constants;

  std::vector<std::vector<std::vector<int>>> blocks(w);
  for (int s = 0; s < w; ++s) {
    blocks[s] = admissible_blocks(spec, spec.j_lo + s, k);
    require(!blocks[s].empty(), Errc::invalid_spec, "no admissible blocks at some index");
    out.alphabet_sizes.push_back(static_cast<int>(blocks[s].size()));
  }

  auto blocks_at = [&](long j) -> const std::vector<std::vector<int>>& {
    return blocks[spec.resolve(j)];
  };

  for (int s = 0; s < w; ++s) {
    const long j = spec.j_lo + s;
    const auto& from = blocks_at(j);
    const auto& to = blocks_at(j + 1);
    Eigen::MatrixXi A = Eigen::MatrixXi::Zero(from.size(), to.size());
    for (std::size_t a = 0; a < from.size(); ++a) {
      for (std::size_t b = 0; b < to.size(); ++b) {
        // successor block = shift by one with a fresh admissible tail symbol
        bool ok = true;
        for (int i = 0; i + 1 < k; ++i) ok = ok && from[a][i + 1] == to[b][i];
        ok = ok && spec.transition(j + k - 1)(from[a][k - 1], to[b][k - 1]) == 1;
        if (ok) A(a, b) = 1;
      }
    }
    out.transitions.push_back(std::move(A));

    Eigen::VectorXd f(from.size()), u(from.size());
    for (std::size_t a = 0; a < from.size(); ++a) {
      const long t = tuple_index(spec, j, from[a]);
      f[a] = spec.potential(j)[t];
      u[a] = spec.observable(j)[t];
    }
    out.potentials.push_back(std::move(f));
    out.observables.push_back(std::move(u));
  }

  validate(out);
  return out;
}

SftSpec make_full_shift(int symbols, long window_len, Extension ext) {
  SftSpec spec;
  spec.j_lo = 0;
  spec.j_hi = window_len - 1;
  spec.extension = ext;
  for (long s = 0; s < window_len; ++s) {
    spec.alphabet_sizes.push_back(symbols);
    spec.transitions.push_back(Eigen::MatrixXi::Ones(symbols, symbols));
    spec.potentials.push_back(Eigen::VectorXd::Zero(symbols));
    spec.observables.push_back(Eigen::VectorXd::Zero(symbols));
  }
  return spec;
}

SftSpec make_golden_mean(long window_len, Extension ext) {
  SftSpec spec = make_full_shift(2, window_len, ext);
  Eigen::MatrixXi A(2, 2);
  A << 1, 1, 1, 0;
  for (auto& t : spec.transitions) t = A;
  return spec;
}

void randomize_potentials(SftSpec& spec, double lo, double hi, std::uint64_t seed) {
  for (int s = 0; s < spec.window(); ++s) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(s)));
    for (long i = 0; i < spec.potentials[s].size(); ++i)
      spec.potentials[s][i] = rng.uniform(lo, hi);
  }
}

void randomize_observables(SftSpec& spec, double lo, double hi, std::uint64_t seed) {
  for (int s = 0; s < spec.window(); ++s) {
    Rng rng(derive_stream(seed, 0x0b5e11ull + static_cast<std::uint64_t>(s)));
    for (long i = 0; i < spec.observables[s].size(); ++i)
      spec.observables[s][i] = rng.uniform(lo, hi);
  }
}

SftSpec make_seeded_primitive(int d, long window_len, double f_amp, double u_amp,
                              std::uint64_t seed) {
  SftSpec spec = make_full_shift(d, window_len);
  bool positive = false;
  for (int attempt = 0; attempt < 64 && !positive; ++attempt) {
    for (int s = 0; s < spec.window(); ++s) {
      Rng rng(derive_stream(seed, 0xa11ce5ull + 977u * attempt + static_cast<std::uint64_t>(s)));
      Eigen::MatrixXi& A = spec.transitions[s];
      for (int tries = 0; tries < 64; ++tries) {
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) A(r, c) = rng.uniform() < 0.75 ? 1 : 0;
        if ((A.rowwise().sum().array() > 0).all() && (A.colwise().sum().array() > 0).all())
          break;
        A.setOnes();
      }
    }
    positive = primitivity_check(spec, 2);
  }
  if (!positive) {
    for (auto& A : spec.transitions) A.setOnes();
  }
  randomize_potentials(spec, -f_amp, f_amp, derive_stream(seed, 1));
  randomize_observables(spec, -u_amp, u_amp, derive_stream(seed, 2));
  spec.constants.n0 = 2;
  validate(spec);
  return spec;
}

}  // namespace seqrpf

#include "seqrpf/circle.hpp"

#include <cmath>
#include <numbers>

namespace seqrpf {

int CircleSpec::resolve(long j) const {
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

int CircleSpec::pot_cutoff() const {
  int k = 0;
  for (const auto& v : potential_modes) k = std::max<int>(k, (v.size() - 1) / 2);
  for (const auto& v : observable_modes) k = std::max<int>(k, (v.size() - 1) / 2);
  return k;
}

void validate(const CircleSpec& spec) {
  require(spec.j_hi >= spec.j_lo, Errc::invalid_spec, "window is empty");
  const int w = spec.window();
  require(static_cast<int>(spec.multipliers.size()) == w &&
              static_cast<int>(spec.potential_modes.size()) == w &&
              static_cast<int>(spec.observable_modes.size()) == w,
          Errc::invalid_spec, "per-index data does not match window length");
  require(spec.mode_cutoff >= 1, Errc::invalid_spec, "mode cutoff must be >= 1");
  for (int s = 0; s < w; ++s) {
    require(spec.multipliers[s] >= 2, Errc::invalid_spec, "multiplier must be >= 2");
    for (const Eigen::VectorXcd* v : {&spec.potential_modes[s], &spec.observable_modes[s]}) {
      require(v->size() % 2 == 1, Errc::invalid_spec, "mode vectors must have odd length");
      const int kp = static_cast<int>((v->size() - 1) / 2);
      for (int q = 1; q <= kp; ++q) {
        const cplx a = (*v)[kp + q], b = (*v)[kp - q];
        require(std::abs(a - std::conj(b)) < 1e-12 * (1.0 + std::abs(a)), Errc::invalid_spec,
                "mode vector is not conjugate-symmetric (function would be complex)");
      }
      require(std::abs((*v)[kp].imag()) < 1e-12, Errc::invalid_spec,
              "mean mode must be real");
    }
  }
}

namespace {

// evaluate a mode vector at x
cplx eval_modes(const Eigen::VectorXcd& modes, double x) {
  const int kp = static_cast<int>((modes.size() - 1) / 2);
  cplx acc = 0;
  for (int q = -kp; q <= kp; ++q)
    acc += modes[q + kp] * std::exp(cplx(0, 2 * std::numbers::pi * q * x));
  return acc;
}

}  // namespace

OperatorMatrix build_circle_operator(const CircleSpec& spec, long j, cplx z) {
  validate(spec);
  const int K = spec.mode_cutoff;
  const int kp = spec.pot_cutoff();
  const int m = spec.multiplier(j);
  const int s = spec.resolve(j);
  const int d = 2 * K + 1;

  // coefficients of exp(f + z u) by uniform-grid quadrature
  const int need = m * K + K;  // largest |index| the matrix reads
  const int N = std::max(4 * (K + std::max(kp, 1)), 2 * need + 2);
  std::vector<cplx> w(N);
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    w[i] = std::exp(eval_modes(spec.potential_modes[s], x) +
                    z * eval_modes(spec.observable_modes[s], x));
  }
  std::vector<cplx> coeff(2 * need + 1);
  for (int q = -need; q <= need; ++q) {
    cplx acc = 0;
    for (int i = 0; i < N; ++i)
      acc += w[i] * std::exp(cplx(0, -2 * std::numbers::pi * q * i / static_cast<double>(N)));
    coeff[q + need] = acc / static_cast<double>(N);
  }

  OperatorMatrix op;
  op.j = j;
  op.z = z;
  op.entries = Eigen::MatrixXcd::Zero(d, d);
  for (int k = -K; k <= K; ++k)
    for (int l = -K; l <= K; ++l)
      op.entries(k + K, l + K) = static_cast<double>(m) * coeff[k * m - l + need];

  // the quadrature is only trustworthy if the integrand's spectrum has decayed
  // by the highest index we read
  double mx = 0, tail = 0;
  for (int q = 0; q <= need; ++q) mx = std::max(mx, std::abs(coeff[q + need]));
  for (int q = std::max(0, need - K); q <= need; ++q)
    tail = std::max(tail, std::abs(coeff[q + need]));
  op.truncation_warning = tail > 1e-12 * std::max(mx, 1e-300);
  return op;
}

CircleFamily::CircleFamily(CircleSpec spec) : spec_(std::move(spec)) { validate(spec_); }

Eigen::MatrixXcd CircleFamily::step_matrix(long j, cplx z) const {
  return build_circle_operator(spec_, j, z).entries;
}

Eigen::RowVectorXcd CircleFamily::reference(long j, Reference ref) const {
  const int d = dim(j);
  Eigen::RowVectorXcd theta = Eigen::RowVectorXcd::Zero(d);
  if (ref == Reference::point_eval) {
    theta.setOnes();  // evaluation at x = 0 sums all coefficients
  } else {
    theta((d - 1) / 2) = 1.0;  // integral against Lebesgue keeps the mean mode
  }
  return theta;
}

CircleSpec make_circle_doubling(int m, double eps, long window_len, int cutoff) {
  CircleSpec spec;
  spec.j_lo = 0;
  spec.j_hi = window_len - 1;
  spec.mode_cutoff = cutoff;
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(3), u = Eigen::VectorXcd::Zero(3);
  f[0] = f[2] = eps / 2;  // eps * cos(2 pi x)
  u[0] = cplx(0, 0.5);    // sin(2 pi x)
  u[2] = cplx(0, -0.5);
  for (long s = 0; s < window_len; ++s) {
    spec.multipliers.push_back(m);
    spec.potential_modes.push_back(f);
    spec.observable_modes.push_back(u);
  }
  validate(spec);
  return spec;
}

}  // namespace seqrpf

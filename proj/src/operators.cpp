#include "seqrpf/operators.hpp"

#include <cmath>

namespace seqrpf {

void ScaledProduct::absorb(const Eigen::MatrixXcd& step) {
  matrix = (n == 0) ? step : Eigen::MatrixXcd(step * matrix);
  ++n;
  const double m = matrix.cwiseAbs().maxCoeff();
  if (m == 0) {
    rank_deficient = true;
    return;
  }
  matrix /= m;
  log_scale += std::log(m);
}

double weak_norm(const ScaledProduct& p) {
  if (p.rank_deficient) return 0;
  const double rows = p.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  return rows * std::exp(p.log_scale);
}

int OperatorFamily::resolve(long j) const {
  const long w = j_hi() - j_lo() + 1;
  long r = (j - j_lo()) % w;
  if (r < 0) r += w;
  return static_cast<int>(r);
}

SftFamily::SftFamily(SftSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  require(spec_.memory == 1, Errc::invalid_spec,
          "operator family needs a memory-1 spec; recode first");
}

Eigen::MatrixXcd SftFamily::step_matrix(long j, cplx z) const {
  return build_sft_operator(spec_, j, z).entries;
}

Eigen::RowVectorXcd SftFamily::reference(long j, Reference ref) const {
  const int d = spec_.dim(j);
  Eigen::RowVectorXcd theta = Eigen::RowVectorXcd::Zero(d);
  if (ref == Reference::point_eval) {
    theta(0) = 1.0;
  } else {
    theta.setConstant(cplx(1.0 / d, 0));
  }
  return theta;
}

OperatorMatrix build_sft_operator(const SftSpec& spec, long j, cplx z) {
  require(spec.memory == 1, Errc::invalid_spec, "memory-1 spec required; recode first");
  const auto& A = spec.transition(j);
  const auto& f = spec.potential(j);
  const auto& u = spec.observable(j);
  OperatorMatrix op;
  op.j = j;
  op.z = z;
  op.entries = Eigen::MatrixXcd::Zero(A.cols(), A.rows());
  for (int a = 0; a < A.rows(); ++a) {
    const cplx w = std::exp(cplx(f[a], 0) + z * u[a]);
    for (int b = 0; b < A.cols(); ++b)
      if (A(a, b) == 1) op.entries(b, a) = w;
  }
  return op;
}

ScaledProduct compose_scaled(const OperatorFamily& fam, long j, int n, cplx z) {
  require(n >= 1, Errc::invalid_spec, "composition needs at least one factor");
  // step matrices repeat with the window, so build each slot at most once
  std::vector<Eigen::MatrixXcd> slots(fam.window());
  std::vector<bool> built(fam.window(), false);
  ScaledProduct p;
  p.j = j;
  for (int m = 0; m < n; ++m) {
    const int s = fam.resolve(j + m);
    if (!built[s]) {
      slots[s] = fam.step_matrix(j + m, z);
      built[s] = true;
    }
    p.absorb(slots[s]);
    if (p.rank_deficient) break;
  }
  return p;
}

ScaledProduct compose_scaled_cached(const std::vector<Eigen::MatrixXcd>& slot_steps,
                                    const OperatorFamily& fam, long j, int n) {
  ScaledProduct p;
  p.j = j;
  for (int m = 0; m < n; ++m) {
    p.absorb(slot_steps[fam.resolve(j + m)]);
    if (p.rank_deficient) break;
  }
  return p;
}

}  // namespace seqrpf

#pragma once

#include <Eigen/Dense>
#include <memory>

#include "seqrpf/sft.hpp"

namespace seqrpf {

// Which reference functional anchors the dual construction: evaluation of a
// depth-1 function at symbol 0 (coefficient sum at mode 0 for the circle
// backend), or the uniform average.
enum class Reference { point_eval, average };

// One time step of the weighted transfer operator restricted to the depth-1
// subspace. entries(b, a) carries symbol a at time j to symbol b at time j+1.
struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  long j = 0;
  cplx z{0, 0};
  bool truncation_warning = false;  // circle backend only
};

// Product of consecutive step operators kept in scaled form: the true product
// is matrix * exp(log_scale). Rescaling after every factor keeps the largest
// entry magnitude at 1, so windows of thousands of steps neither overflow nor
// underflow.
struct ScaledProduct {
  Eigen::MatrixXcd matrix;
  double log_scale = 0;
  long j = 0;
  int n = 0;
  bool rank_deficient = false;  // product vanished identically

  void absorb(const Eigen::MatrixXcd& step);
};

// operator norm on the depth-1 subspace induced by the sup norm: the largest
// absolute row sum, times the carried scale
double weak_norm(const ScaledProduct& p);

// Backend interface consumed by the solver layer: per-index dimensions, step
// matrices, and the reference functional as a covector.
class OperatorFamily {
 public:
  virtual ~OperatorFamily() = default;
  virtual long j_lo() const = 0;
  virtual long j_hi() const = 0;
  virtual int dim(long j) const = 0;
  virtual Eigen::MatrixXcd step_matrix(long j, cplx z) const = 0;
  virtual Eigen::RowVectorXcd reference(long j, Reference ref) const = 0;

  int window() const { return static_cast<int>(j_hi() - j_lo() + 1); }
  // window slot for an arbitrary index; default wraps periodically
  virtual int resolve(long j) const;
};

class SftFamily : public OperatorFamily {
 public:
  explicit SftFamily(SftSpec spec);
  long j_lo() const override { return spec_.j_lo; }
  long j_hi() const override { return spec_.j_hi; }
  int dim(long j) const override { return spec_.dim(j); }
  Eigen::MatrixXcd step_matrix(long j, cplx z) const override;
  Eigen::RowVectorXcd reference(long j, Reference ref) const override;
  int resolve(long j) const override { return spec_.resolve(j); }
  const SftSpec& spec() const { return spec_; }

 private:
  SftSpec spec_;
};

OperatorMatrix build_sft_operator(const SftSpec& spec, long j, cplx z);

// n-step composition starting at index j (factors applied left to right in
// time order, so the result maps depth-1 data at j to depth-1 data at j+n)
ScaledProduct compose_scaled(const OperatorFamily& fam, long j, int n, cplx z);

// same, but with the per-slot step matrices already built (hot loops)
ScaledProduct compose_scaled_cached(const std::vector<Eigen::MatrixXcd>& slot_steps,
                                    const OperatorFamily& fam, long j, int n);

}  // namespace seqrpf

#pragma once

#include "seqrpf/operators.hpp"

namespace seqrpf {

// Expanding circle covers x -> m_j x mod 1 with trigonometric-polynomial
// potentials, handled in Fourier coordinates. Modes are stored as complex
// coefficient vectors over q in [-K_pot, K_pot] (index q + K_pot) and must be
// conjugate-symmetric so the functions are real-valued. The transfer operator
// is truncated to modes [-K, K]; coefficient integrals use uniform-grid
// quadrature, which is exact for trigonometric polynomials inside the band.
struct CircleSpec {
  long j_lo = 0;
  long j_hi = 0;
  std::vector<int> multipliers;              // m_j >= 2
  std::vector<Eigen::VectorXcd> potential_modes;
  std::vector<Eigen::VectorXcd> observable_modes;
  int mode_cutoff = 8;                       // K
  Extension extension = Extension::periodic;

  int window() const { return static_cast<int>(j_hi - j_lo + 1); }
  int resolve(long j) const;
  int multiplier(long j) const { return multipliers[resolve(j)]; }
  int pot_cutoff() const;                    // largest K_pot over the window
};

void validate(const CircleSpec& spec);

OperatorMatrix build_circle_operator(const CircleSpec& spec, long j, cplx z);

class CircleFamily : public OperatorFamily {
 public:
  explicit CircleFamily(CircleSpec spec);
  long j_lo() const override { return spec_.j_lo; }
  long j_hi() const override { return spec_.j_hi; }
  int dim(long) const override { return 2 * spec_.mode_cutoff + 1; }
  Eigen::MatrixXcd step_matrix(long j, cplx z) const override;
  Eigen::RowVectorXcd reference(long j, Reference ref) const override;
  int resolve(long j) const override { return spec_.resolve(j); }
  const CircleSpec& spec() const { return spec_; }

 private:
  CircleSpec spec_;
};

// doubling-type test system: T x = m x mod 1, f = eps * cos(2 pi x), u = sin
CircleSpec make_circle_doubling(int m, double eps, long window_len, int cutoff);

}  // namespace seqrpf

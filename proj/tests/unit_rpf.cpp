#include <doctest.h>

#include "oracles.hpp"
#include "seqrpf/rpf.hpp"

using namespace seqrpf;

namespace {
SolveOptions quiet() {
  SolveOptions o;
  o.enforce = false;
  return o;
}
}  // namespace

TEST_CASE("golden mean triple matches the exact eigendata") {
  const SftSpec gm = make_golden_mean(8);
  const SftFamily fam(gm);
  const RpfTriplet t = solve_triplet(fam, 0, cplx(0, 0), quiet());
  const double phi = oracle::phi();

  CHECK(std::abs(t.lambda - cplx(phi, 0)) <= 1e-10);
  // nu is the left eigenvector scaled to total mass one, h the right one
  // scaled so nu(h) = 1
  const Eigen::Vector2d nu_want(phi / (phi + 1), 1 / (phi + 1));
  const Eigen::Vector2d h_want = Eigen::Vector2d(phi, 1) * (phi + 1) / (phi * phi + 1);
  for (int a = 0; a < 2; ++a) {
    CHECK(std::abs(t.nu(a) - nu_want(a)) <= 1e-10);
    CHECK(std::abs(t.h(a) - h_want(a)) <= 1e-10);
  }
  CHECK(t.eigen_residual <= 1e-10);
  CHECK(t.dual_residual <= 1e-10);
  CHECK(t.converged);
}

TEST_CASE("normalized full shift has unit eigendata") {
  SftSpec fs = make_full_shift(2, 6);
  for (auto& f : fs.potentials) f.setConstant(-std::log(2.0));
  const SftFamily fam(fs);
  const RpfTriplet t = solve_triplet(fam, 3, cplx(0, 0), quiet());
  CHECK(std::abs(t.lambda - cplx(1, 0)) <= 1e-12);
  CHECK(std::abs(t.h(0) - cplx(1, 0)) <= 1e-12);
  CHECK(std::abs(t.h(1) - cplx(1, 0)) <= 1e-12);
  CHECK(std::abs(t.nu(0) - cplx(0.5, 0)) <= 1e-12);
}

TEST_CASE("solve_family fills one slot per window index") {
  const SftSpec gm = make_golden_mean(5);
  const SftFamily fam(gm);
  const TripletFamily fam_t = solve_family(fam, cplx(0, 0), quiet());
  CHECK(fam_t.window() == 5);
  CHECK(std::abs(fam_t.log_lambda_sum(0, 10, fam) - 10.0 * std::log(oracle::phi())) <= 1e-9);
}

TEST_CASE("residual decay fits the squared golden ratio contraction") {
  const SftSpec gm = make_golden_mean(8);
  const SftFamily fam(gm);
  std::vector<int> horizons;
  for (int h = 4; h <= 36; h += 4) horizons.push_back(h);
  std::vector<Eigen::VectorXcd> tests{Eigen::VectorXcd::Ones(2), Eigen::VectorXcd::Unit(2, 0)};
  const ConvergenceFit fit = convergence_rate_fit(fam, 0, cplx(0, 0), horizons, tests, quiet());
  CHECK(fit.fit.slope < -0.01);
  // the two longest horizons saturate at the double-precision floor
  CHECK(fit.floored == 2);
  const double delta = std::exp(fit.fit.slope);
  const double want = 1 / (oracle::phi() * oracle::phi());
  CHECK(std::abs(delta - want) / want <= 0.05);
}

TEST_CASE("coin pressure curve matches the closed form") {
  SftSpec fs = make_full_shift(2, 4);
  for (auto& f : fs.potentials) f.setConstant(-std::log(2.0));
  for (auto& u : fs.observables) {
    u(0) = 0;
    u(1) = 1;
  }
  const SftFamily fam(fs);
  PressureOptions popts;
  popts.solve = quiet();
  for (double s : {-1.2, -0.4, 0.3, 0.9}) {
    const cplx got = pressure(fam, 0, cplx(s, 0), popts);
    CHECK(std::abs(got - cplx(oracle::coin_pressure(s), 0)) <= 1e-10);
  }
  for (double t : {0.4, 1.1}) {
    const cplx got = pressure(fam, 0, cplx(0, t), popts);
    const cplx want = std::log((1.0 + std::exp(cplx(0, t))) / 2.0);
    CHECK(std::abs(got - want) <= 1e-10);
  }
}

TEST_CASE("pressure derivatives reproduce bernoulli mean and variance") {
  SftSpec fs = make_full_shift(2, 4);
  for (auto& f : fs.potentials) f.setConstant(-std::log(2.0));
  for (auto& u : fs.observables) {
    u(0) = 0;
    u(1) = 1;
  }
  const SftFamily fam(fs);
  PressureOptions popts;
  popts.solve = quiet();
  const PressureSequence seq = pressure_derivatives(fam, 3, 0.2, 64, popts);
  CHECK(seq.quality <= 1e-9);
  CHECK(std::abs(seq.derivative(0, 1, fam) - 0.5) <= 1e-9);
  CHECK(std::abs(seq.derivative(0, 2, fam) - 0.25) <= 1e-9);
  CHECK(std::abs(seq.derivative(0, 3, fam) - 0.0) <= 1e-9);
  CHECK(std::abs(seq.averaged(0, 2, 8, fam) - 0.25) <= 1e-9);
}

TEST_CASE("derivative tables agree with the continued pressure nearby") {
  SftSpec gm = make_golden_mean(6);
  randomize_observables(gm, -1, 1, 31);
  const SftFamily fam(gm);
  PressureOptions popts;
  popts.solve = quiet();
  const double r = trust_radius(gm) / 2;
  const PressureSequence seq = pressure_derivatives(fam, 3, r, 64, popts);

  const cplx z(0, r / 6);
  const cplx direct = pressure(fam, 0, z, popts);
  cplx taylor = 0;
  cplx zp = 1;
  for (int k = 1; k <= 3; ++k) {
    zp *= z;
    taylor += seq.derivs[0][k] * zp / std::tgamma(k + 1.0);
  }
  CHECK(std::abs(direct - taylor) <= 1e-4 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("trust radius shrinks as observables grow") {
  SftSpec gm = make_golden_mean(4);
  for (auto& u : gm.observables) u.setConstant(1.0);
  const double r1 = trust_radius(gm);
  for (auto& u : gm.observables) u.setConstant(10.0);
  const double r2 = trust_radius(gm);
  CHECK(r1 > 0);
  CHECK(r2 < r1);
}

TEST_CASE("conformal potentials make the supplied family invariant") {
  const SftSpec base = make_golden_mean(6);
  std::vector<Eigen::VectorXd> m_family;
  Rng rng(derive_stream(17, 0));
  for (int s = 0; s < base.window(); ++s) {
    Eigen::VectorXd m(2);
    m << 0.5 + 0.4 * rng.uniform(), 0.1 + 0.3 * rng.uniform();
    m /= m.sum();
    m_family.push_back(m);
  }
  const NonsingularReport rep = nonsingular_check(base, m_family, quiet());
  CHECK(rep.max_lambda_gap <= 1e-10);
  CHECK(rep.max_nu_gap <= 1e-10);
}

TEST_CASE("perturbation responses shrink with the input") {
  const SftSpec gm = make_golden_mean(4);
  const std::vector<StabilityRow> rows =
      stability_sweep(gm, {1e-1, 1e-2, 1e-3}, 0.1, 5, quiet());
  REQUIRE(rows.size() == 3);
  const auto worst = [](const StabilityRow& r) { return std::max({r.dlambda, r.dh, r.dnu}); };
  CHECK(worst(rows[0]) > worst(rows[1]));
  CHECK(worst(rows[1]) > worst(rows[2]));
}

TEST_CASE("gauge adjustment pins scalars to one at the base parameter") {
  const SftSpec gm = make_golden_mean(5);
  const SftFamily fam(gm);
  const TripletFamily at0 = solve_family(fam, cplx(0, 0), quiet());
  const NormalizedFamily norm = normalize_family(at0, at0, fam);
  for (int s = 0; s < 5; ++s) {
    CHECK(std::abs(norm.a[s] - cplx(1, 0)) <= 1e-12);
    CHECK(std::abs(norm.tilde_lambda[s] - cplx(1, 0)) <= 1e-12);
  }
}

TEST_CASE("flat doubling cover has branch-count eigenvalue and lebesgue data") {
  const CircleSpec spec = make_circle_doubling(2, 0.0, 4, 8);
  const CircleFamily fam(spec);
  const RpfTriplet t = solve_triplet(fam, 0, cplx(0, 0), quiet());
  CHECK(std::abs(t.lambda - cplx(2, 0)) <= 1e-10);
  // the invariant density of the flat doubling map is lebesgue: pure mode 0
  const int center = 8;
  CHECK(std::abs(t.h(center) - cplx(1, 0)) <= 1e-8);
  for (int q = 0; q < 17; ++q)
    if (q != center) CHECK(std::abs(t.h(q)) <= 1e-8);
}

TEST_CASE("warped doubling cover keeps a real pressure curve") {
  const CircleSpec spec = make_circle_doubling(2, 0.15, 4, 10);
  const CircleFamily fam(spec);
  PressureOptions popts;
  popts.solve = quiet();
  const PressureSequence seq = pressure_derivatives(fam, 2, 0.1, 64, popts);
  CHECK(seq.quality <= 1e-8);
  CHECK(seq.derivative(0, 2, fam) >= 0);
}

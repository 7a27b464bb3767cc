#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qsnn/error.hpp"
#include "qsnn/quantum.hpp"

using namespace qsnn;
using namespace qsnn::quantum;

namespace {

constexpr double kPi = std::numbers::pi;

HamiltonianParams exchange_only(double g, double t_end) {
  HamiltonianParams p;
  p.g = g;
  p.theta_schedule.entries = {{0.0, t_end + 1.0, kPi}};
  return p;
}

double excited_population(const DensityMatrix& rho, const FockConfig& cfg) {
  return partial_trace_to_qubit(rho, cfg).matrix()(1, 1).real();
}

}  // namespace

TEST(DensityMatrix, RejectsBrokenInvariants) {
  ComplexOperator m = ComplexOperator::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  EXPECT_NO_THROW(DensityMatrix::from_matrix(m));

  ComplexOperator not_hermitian = m;
  not_hermitian(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix::from_matrix(not_hermitian), Error);

  ComplexOperator bad_trace = m * 1.1;
  EXPECT_THROW(DensityMatrix::from_matrix(bad_trace), Error);

  ComplexOperator negative = ComplexOperator::Zero(2, 2);
  negative(0, 0) = 1.2;
  negative(1, 1) = -0.2;
  EXPECT_THROW(DensityMatrix::from_matrix(negative), Error);
}

TEST(DensityMatrix, PureAndMixedPurity) {
  EXPECT_NEAR(DensityMatrix::basis_state(4, 2).purity(), 1.0, 1e-15);
  EXPECT_NEAR(DensityMatrix::maximally_mixed(4).purity(), 0.25, 1e-15);
}

TEST(Operators, LadderAlgebra) {
  const FockConfig cfg{3};
  const auto a = annihilation_op(cfg);
  const auto s = lowering_op(cfg);
  // a|g,n> = sqrt(n)|g,n-1>
  EXPECT_NEAR(a(0, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(a(2, 3).real(), std::sqrt(3.0), 1e-15);
  // sigma|e,n> = |g,n>
  EXPECT_EQ(s(0, cfg.fock_dim()), Complex(1.0, 0.0));
  EXPECT_NEAR((a * s - s * a).norm(), 0.0, 1e-15);
}

TEST(Hamiltonian, IsHermitianAndVanishesOutsideSchedule) {
  const FockConfig cfg{4};
  HamiltonianParams p;
  p.drive_amp = 0.7;
  p.theta_schedule.entries = {{0.0, 1.0, 1.0}, {1.0, 2.0, 2.5}};
  for (double t : {0.0, 0.3, 1.5}) {
    const auto H = hamiltonian_at(t, p, cfg);
    EXPECT_LT((H - H.adjoint()).norm(), 1e-14);
    EXPECT_GT(H.norm(), 0.0);
  }
  EXPECT_EQ(hamiltonian_at(2.5, p, cfg).norm(), 0.0);
}

TEST(Evolution, VacuumRabiOscillation) {
  const FockConfig cfg{4};
  const double g = 1.0;
  const double dt = 1e-3 / g;
  const double t_end = 3.0 * kPi / g;  // three population periods
  const auto rho0 = DensityMatrix::basis_state(cfg.dim(), cfg.fock_dim());  // |e,0>
  const double t_grid = dt * std::round(t_end / dt);
  const auto tr = evolve(rho0, exchange_only(g, t_grid), {}, dt, t_grid, 100);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const double c = std::cos(g * tr.times[k]);
    worst = std::max(worst, std::abs(excited_population(tr.states[k], cfg) - c * c));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Evolution, PreservesStateInvariantsUnderDriveAndLoss) {
  const FockConfig cfg{4};
  QubitCavity model(cfg);
  HamiltonianParams p;
  p.drive_amp = 0.8;
  p.tau_e = 2.0;
  p.theta_schedule.entries = {{0.0, 5.0, 1.3}, {5.0, 10.0, 2.2}};
  const auto channels = model.default_channels(7.4, 0.3);
  EXPECT_EQ(channels.size(), 2u);
  const auto tr = evolve(DensityMatrix::basis_state(cfg.dim(), 5), p, channels, 0.01, 10.0, 1);
  ASSERT_EQ(tr.states.size(), 1001u);
  for (const auto& rho : tr.states) {
    EXPECT_LT(rho.hermiticity_residual(), 1e-10);
    EXPECT_LT(rho.trace_error(), 1e-9);
    EXPECT_GT(rho.min_eigenvalue(), -1e-9);
  }
}

TEST(Evolution, QubitDecaysAtRateOneOverT1) {
  const FockConfig cfg{2};
  QubitCavity model(cfg);
  HamiltonianParams p;  // no schedule: H = 0
  const double t1 = 2.0;
  const auto tr = evolve(DensityMatrix::basis_state(cfg.dim(), cfg.fock_dim()), p,
                         model.default_channels(t1, 0.0), 0.01, 4.0, 100);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    EXPECT_NEAR(excited_population(tr.states[k], cfg), std::exp(-tr.times[k] / t1), 1e-9);
  }
}

TEST(Evolution, StepCountRequiresIntegerMultiple) {
  EXPECT_EQ(step_count(0.01, 50.0), 5000u);
  EXPECT_THROW(step_count(0.03, 1.0), Error);
}

TEST(Reduction, PartialTraceAndBloch) {
  const FockConfig cfg{3};
  const auto plus = qubit_state_from_bloch({1.0, 0.0, 0.0});
  const auto full = with_cavity_vacuum(plus, cfg);
  const auto back = partial_trace_to_qubit(full, cfg);
  EXPECT_LT((back.matrix() - plus.matrix()).norm(), 1e-15);
  const auto r = bloch_vector(back);
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);

  const auto excited = bloch_vector(DensityMatrix::basis_state(2, 1));
  EXPECT_NEAR(excited[2], -1.0, 1e-15);

  for (const auto& dir : {std::array<double, 3>{0, 1, 0}, std::array<double, 3>{0.6, 0, 0.8}}) {
    const auto b = bloch_vector(qubit_state_from_bloch(dir));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(b[i], dir[i], 1e-14);
  }
}

TEST(Schedule, RejectsOverlapAndOutOfRangeAngles) {
  ThetaSchedule s;
  s.entries = {{0.0, 2.0, 1.0}, {1.0, 3.0, 1.0}};
  EXPECT_THROW(s.validate(), Error);
  s.entries = {{0.0, 1.0, 2.0 * kPi}};
  EXPECT_THROW(s.validate(), Error);
  s.entries = {{0.0, 1.0, 0.5}, {1.0, 2.0, 0.7}};
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.active(1.0)->theta, 0.7);
  EXPECT_EQ(s.active(2.0), nullptr);
}

TEST(Evolution, ClosedSystemConservesPurity) {
  const FockConfig cfg{4};
  HamiltonianParams p;
  p.drive_amp = 0.6;
  p.theta_schedule.entries = {{0.0, 10.0, 2.0}};
  const auto tr = evolve(DensityMatrix::basis_state(cfg.dim(), cfg.fock_dim()), p, {}, 0.01, 10.0,
                         10);
  for (const auto& rho : tr.states) EXPECT_NEAR(rho.purity(), 1.0, 1e-6);
}

TEST(Evolution, FockTruncationIsConverged) {
  HamiltonianParams p;
  p.drive_amp = 0.3;
  p.theta_schedule.entries = {{0.0, 5.0, 2.0}};
  auto bloch_series = [&](int n_max) {
    const FockConfig cfg{n_max};
    QubitCavity model(cfg);
    const auto tr = evolve(DensityMatrix::basis_state(cfg.dim(), cfg.fock_dim()), p,
                           model.default_channels(7.4, 0.5), 0.01, 5.0, 10);
    std::vector<std::array<double, 3>> out;
    for (const auto& rho : tr.states) out.push_back(bloch_vector(partial_trace_to_qubit(rho, cfg)));
    return out;
  };
  const auto a = bloch_series(4), b = bloch_series(6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[k][i], b[k][i], 1e-4);
}

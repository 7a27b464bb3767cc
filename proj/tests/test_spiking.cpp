#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qsnn/error.hpp"
#include "qsnn/spiking.hpp"

using namespace qsnn;
using namespace qsnn::spiking;

namespace {

NeuronCircuitParams calibrated(double k1) {
  NeuronCircuitParams p;
  p.k1_coupled = k1;
  p.k2_coupled = -10.0;
  return p;
}

NeuronNetworkState kicked() {
  NeuronNetworkState s;
  s.v1 = 1.0;
  return s;
}

// Memristors that never leave their dead band: the circuit is linear.
NeuronCircuitParams frozen_memristors() {
  NeuronCircuitParams p;
  for (auto& law : p.mem_laws) {
    law.v_set = 1e9;
    law.v_reset = -1e9;
  }
  p.k1_coupled = 0.5;
  p.k2_coupled = 0.3;
  return p;
}

SpikeTrain train_of(std::vector<double> v, double dt = 1.0) {
  SpikeTrain t;
  t.dt = dt;
  t.v = std::move(v);
  return t;
}

}  // namespace

TEST(Memristance, RelaxesTowardOnStateAboveSet) {
  NeuronNetworkState s;
  s.v1 = 0.9;
  s.r_mem = {1.0, 1.0, 1.0, 1.0};
  MemristanceLaw law;
  const auto u = memristance_step(s, law, 0, 0.1);
  EXPECT_NEAR(u.resistance, law.r_on + (1.0 - law.r_on) * std::exp(-0.1 / law.tau_switch), 1e-15);
  EXPECT_NEAR(u.rate, (law.r_on - 1.0) / law.tau_switch, 1e-15);
}

TEST(Memristance, RelaxesTowardOffStateBelowReset) {
  NeuronNetworkState s;
  s.v2 = -0.9;
  s.r_mem = {0.8, 0.8, 0.8, 0.8};
  MemristanceLaw law;
  const auto u = memristance_step(s, law, 3, 0.25);
  EXPECT_NEAR(u.resistance, law.r_off + (0.8 - law.r_off) * std::exp(-0.25 / law.tau_switch), 1e-15);
}

TEST(Memristance, HoldsInsideDeadBand) {
  NeuronNetworkState s;
  s.v1 = 0.3;
  s.r_mem = {0.9, 0.9, 0.9, 0.9};
  const auto u = memristance_step(s, MemristanceLaw{}, 1, 1.0);
  EXPECT_EQ(u.resistance, 0.9);
  EXPECT_EQ(u.rate, 0.0);
}

TEST(Memristance, DrivingVoltageFollowsNeuron) {
  NeuronNetworkState s;
  s.v1 = 1.5;
  s.v2 = -2.5;
  EXPECT_EQ(driving_voltage(s, 0), 1.5);
  EXPECT_EQ(driving_voltage(s, 1), 1.5);
  EXPECT_EQ(driving_voltage(s, 2), -2.5);
  EXPECT_EQ(driving_voltage(s, 3), -2.5);
  EXPECT_THROW(driving_voltage(s, 4), Error);
}

TEST(OdeRhs, MatchesCoefficientFormulas) {
  NeuronCircuitParams p;
  p.c1 = 1.3;
  p.c2 = 0.4;
  p.r3 = 0.7;
  p.r4 = 5.0;
  p.k1_coupled = 2.0;
  NeuronNetworkState s;
  s.v1 = 0.2;  // inside the dead band: dR/dt = 0
  s.dv1 = -0.1;
  s.v2 = 0.05;
  s.r_mem = {0.85, 0.9, 1.0, 1.0};
  const auto d = ode_rhs(s, p);
  const double rm1 = 0.85, rm2 = 0.9;
  const double a1 = (rm2 / p.r3 + p.c1 / p.c2 + rm1 / p.r4) / (rm2 * p.c1);
  const double b1 = (1.0 / (p.r3 * p.c2)) / (rm2 * p.c1);
  EXPECT_NEAR(d.ddv1, -a1 * s.dv1 - b1 * s.v1 - p.k1_coupled * s.v2, 1e-12);
  EXPECT_EQ(d.dv1, s.dv1);
}

TEST(OdeRhs, ZeroMemristanceIsSingular) {
  NeuronNetworkState s;
  s.r_mem = {1.0, 0.0, 1.0, 1.0};
  try {
    ode_rhs(s, NeuronCircuitParams{});
    FAIL() << "expected a singular-coefficient error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_coefficient);
  }
}

TEST(Simulate, UncoupledSecondNeuronStaysAtRest) {
  auto p = calibrated(0.0);
  p.k2_coupled = 0.0;
  const auto tr = simulate(p, kicked(), 1e-3, 5.0);
  for (double v : tr[1].v) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(tr[0].size(), 5001u);
}

TEST(Simulate, Rk4IsFourthOrderOnLinearCircuit) {
  const auto p = frozen_memristors();
  const auto s = kicked();
  const double t_end = 2.0;
  const double ref = simulate(p, s, 1e-4, t_end)[0].v.back();
  const double e1 = std::abs(simulate(p, s, 4e-3, t_end)[0].v.back() - ref);
  const double e2 = std::abs(simulate(p, s, 2e-3, t_end)[0].v.back() - ref);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Simulate, DivergenceRaisesIntegrationFaultWithTime) {
  auto p = calibrated(1e6);
  p.k2_coupled = 1e6;
  try {
    simulate(p, kicked(), 1e-3, 50.0);
    FAIL() << "expected an integration fault";
  } catch (const IntegrationFault& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 50.0);
  }
}

TEST(Simulate, RejectsBadArguments) {
  EXPECT_THROW(simulate(calibrated(0.0), kicked(), 0.0, 1.0), Error);
  EXPECT_THROW(simulate(calibrated(0.0), kicked(), 1.0, 0.5), Error);
  auto p = calibrated(0.0);
  p.c1 = 0.0;
  try {
    simulate(p, kicked(), 1e-3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("circuit.c1 must be > 0"), std::string::npos);
  }
}

TEST(CountSpikes, CountsThresholdRunsAtTheirMaximum) {
  const auto c = count_spikes(train_of({0.0, 0.5, 0.9, 0.4, 0.0, 0.3, 0.0, 0.8}), 0.25);
  ASSERT_EQ(c.count, 3u);
  EXPECT_EQ(c.spikes[0], (Spike{2.0, 0.9}));
  EXPECT_EQ(c.spikes[1], (Spike{5.0, 0.3}));
  EXPECT_EQ(c.spikes[2], (Spike{7.0, 0.8}));
}

TEST(CountSpikes, SineHasOneSpikePerPeriod) {
  std::vector<double> v;
  const double dt = 1e-3;
  for (int i = 0; i <= 10000; ++i) v.push_back(std::sin(2.0 * std::numbers::pi * i * dt));
  EXPECT_EQ(count_spikes(train_of(v, dt), 0.5).count, 10u);
  EXPECT_EQ(count_spikes(train_of(v, dt), 1.5).count, 0u);
}

TEST(CountSpikes, EmptyTrainIsAnError) {
  try {
    count_spikes(SpikeTrain{}, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_input);
  }
}

TEST(PhasePortrait, ExactForQuadratics) {
  std::vector<double> v;
  const double dt = 0.1;
  for (int i = 0; i < 20; ++i) v.push_back(3.0 * (i * dt) * (i * dt) - i * dt);
  const auto p = phase_portrait(train_of(v, dt));
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(p[i].dv, 6.0 * i * dt - 1.0, 1e-9);
    EXPECT_NEAR(p[i].ddv, 6.0, 1e-7);
  }
  EXPECT_THROW(phase_portrait(train_of({1, 2, 3, 4})), Error);
}

TEST(Calibration, SpikeCountStaircaseIsMonotone) {
  std::size_t prev = 0;
  std::size_t first = 0;
  for (double k1 = 150.0; k1 <= 254.0; k1 += 8.0) {
    const auto tr = simulate(calibrated(k1), kicked(), 1e-3, 50.0);
    const std::size_t q = count_spikes(tr[0], 0.2).count;
    if (k1 == 150.0) first = q;
    EXPECT_GE(q, prev) << "k1 = " << k1;
    prev = q;
  }
  EXPECT_GT(prev, first);
}

TEST(Calibration, CountsStableUnderStepRefinement) {
  for (double k1 : {220.0, 254.0, 267.5}) {
    const auto a = count_spikes(simulate(calibrated(k1), kicked(), 1e-3, 50.0)[0], 0.2).count;
    const auto b = count_spikes(simulate(calibrated(k1), kicked(), 5e-4, 50.0)[0], 0.2).count;
    EXPECT_EQ(a, b) << "k1 = " << k1;
  }
}

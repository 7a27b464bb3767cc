#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace qsnn::spiking {

/// Hysteretic memristance law with a dead band.
///
/// Above `v_set` the resistance relaxes toward `r_on`, below `v_reset` toward
/// `r_off`; in between it holds. Relaxation is first order with time constant
/// `tau_switch`.
struct MemristanceLaw {
  double r_on = 0.8;
  double r_off = 1.0;
  double v_set = 0.7;
  double v_reset = -0.7;
  double tau_switch = 0.5;

  void validate() const;
};

/// Component values of the two coupled neuron circuits.
///
/// Neuron 1 uses c1, c2, r3, r4 with memristors 0 (R_Mem1) and 1 (R_Mem2);
/// neuron 2 uses c5, c6, r5, r6 with memristors 2 (R_Mem3) and 3 (R_Mem4).
/// Memristors 0 and 1 switch on v1, memristors 2 and 3 on v2.
struct NeuronCircuitParams {
  double c1 = 1.0, c2 = 0.2, c5 = 1.0, c6 = 0.2;
  double r3 = 0.2, r4 = 100.0, r5 = 0.2, r6 = 100.0;
  double k1_coupled = 0.0;
  double k2_coupled = 0.0;
  std::array<MemristanceLaw, 4> mem_laws{};

  void validate() const;
};

struct NeuronNetworkState {
  double t = 0.0;
  double v1 = 0.0, v2 = 0.0;
  double dv1 = 0.0, dv2 = 0.0;
  std::array<double, 4> r_mem{1.0, 1.0, 1.0, 1.0};

  bool finite() const;
};

struct Spike {
  double t_peak = 0.0;
  double v_peak = 0.0;

  friend bool operator==(const Spike&, const Spike&) = default;
};

/// Uniformly sampled voltage trace; sample i sits at t0 + i * dt.
struct SpikeTrain {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> v;
  std::vector<Spike> spikes;

  std::size_t size() const { return v.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

struct MemristanceUpdate {
  double resistance;
  double rate;  // dR/dt at the start of the step
};

struct Derivative {
  double dv1, ddv1, dv2, ddv2;
  std::array<double, 4> dr;
};

struct SpikeCount {
  std::size_t count = 0;
  std::vector<Spike> spikes;
};

struct PortraitPoint {
  double dv;
  double ddv;
};

/// Voltage driving memristor `index` (v1 for 0 and 1, v2 for 2 and 3).
double driving_voltage(const NeuronNetworkState& state, std::size_t index);

/// dR/dt of the relaxation law at voltage `v` and resistance `r`.
double memristance_rate(double v, double r, const MemristanceLaw& law);

/// Advances one memristor by `dt` with the exact exponential solution of the
/// relaxation law at fixed voltage, clamped to [r_on, r_off].
MemristanceUpdate memristance_step(const NeuronNetworkState& state,
                                   const MemristanceLaw& law, std::size_t index,
                                   double dt);

/// First-order right-hand side of the coupled circuit equations. Each
/// equation is solved for d2v/dt2 with the coupling term K * v_other kept on
/// the left, so it contributes -K * v_other.
Derivative ode_rhs(const NeuronNetworkState& state,
                   const NeuronCircuitParams& params);

/// Fixed-step RK4 integration from `initial` to `t_end`. Returns one train per
/// neuron with samples at every step (spike lists left empty).
std::array<SpikeTrain, 2> simulate(const NeuronCircuitParams& params,
                                   const NeuronNetworkState& initial, double dt,
                                   double t_end);

SpikeCount count_spikes(const SpikeTrain& train, double threshold);

std::vector<PortraitPoint> phase_portrait(const SpikeTrain& train);

}  // namespace qsnn::spiking

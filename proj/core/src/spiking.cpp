#include "qsnn/spiking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsnn/error.hpp"

namespace qsnn::spiking {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Component values of one neuron circuit in the shape shared by both equations.
struct NeuronSide {
  double c_a, c_b;      // C1, C2 (or C5, C6)
  double r_x, r_y;      // R3, R4 (or R5, R6)
  double k;             // coupling coefficient
};

// d2v/dt2 for one neuron. `r_aux` is the memristor in the R_Mem1/R_Mem3 slot,
// `r_main` and `dr_main` the one in the R_Mem2/R_Mem4 slot.
double neuron_accel(double v, double dv, double r_aux, double r_main,
                    double dr_main, const NeuronSide& s, double v_other) {
  const double rc = r_main * s.c_a;
  if (!(rc > 0.0)) {
    throw Error(Errc::singular_coefficient,
                "R_Mem(t) * C product is not positive (" + std::to_string(rc) + ")");
  }
  const double damping =
      (r_main / s.r_x + s.c_a / s.c_b + dr_main * s.c_a + r_aux / s.r_y) / rc;
  const double stiffness = (1.0 / (s.r_x * s.c_b) + dr_main / s.r_x) / rc;
  return -damping * dv - stiffness * v - s.k * v_other;
}

using Vec8 = std::array<double, 8>;  // v1, dv1, v2, dv2, R1..R4

NeuronNetworkState unpack(const Vec8& y, double t) {
  NeuronNetworkState s;
  s.t = t;
  s.v1 = y[0];
  s.dv1 = y[1];
  s.v2 = y[2];
  s.dv2 = y[3];
  s.r_mem = {y[4], y[5], y[6], y[7]};
  return s;
}

Vec8 pack(const NeuronNetworkState& s) {
  return {s.v1, s.dv1, s.v2, s.dv2, s.r_mem[0], s.r_mem[1], s.r_mem[2], s.r_mem[3]};
}

Vec8 rhs_vec(const Vec8& y, double t, const NeuronCircuitParams& p) {
  const Derivative d = ode_rhs(unpack(y, t), p);
  return {d.dv1, d.ddv1, d.dv2, d.ddv2, d.dr[0], d.dr[1], d.dr[2], d.dr[3]};
}

Vec8 axpy(const Vec8& y, double h, const Vec8& k) {
  Vec8 out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

}  // namespace

void MemristanceLaw::validate() const {
  require(positive_finite(r_on), "memristance law: r_on must be > 0");
  require(std::isfinite(r_off) && r_off > r_on,
          "memristance law: r_off must be > r_on");
  require(std::isfinite(v_set) && std::isfinite(v_reset) && v_set > v_reset,
          "memristance law: v_set must be > v_reset");
  require(positive_finite(tau_switch), "memristance law: tau_switch must be > 0");
}

void NeuronCircuitParams::validate() const {
  const std::array<std::pair<const char*, double>, 8> positive{{
      {"c1", c1}, {"c2", c2}, {"c5", c5}, {"c6", c6},
      {"r3", r3}, {"r4", r4}, {"r5", r5}, {"r6", r6},
  }};
  for (const auto& [name, value] : positive) {
    require(positive_finite(value), std::string("circuit.") + name + " must be > 0");
  }
  require(std::isfinite(k1_coupled), "circuit.k1_coupled must be finite");
  require(std::isfinite(k2_coupled), "circuit.k2_coupled must be finite");
  for (const auto& law : mem_laws) law.validate();
}

bool NeuronNetworkState::finite() const {
  if (!std::isfinite(t) || !std::isfinite(v1) || !std::isfinite(v2) ||
      !std::isfinite(dv1) || !std::isfinite(dv2)) {
    return false;
  }
  return std::all_of(r_mem.begin(), r_mem.end(),
                     [](double r) { return std::isfinite(r); });
}

double driving_voltage(const NeuronNetworkState& state, std::size_t index) {
  require(index < 4, "memristor index out of range");
  return index < 2 ? state.v1 : state.v2;
}

double memristance_rate(double v, double r, const MemristanceLaw& law) {
  if (!std::isfinite(v)) {
    throw Error(Errc::integration_fault, "non-finite voltage at memristor");
  }
  if (v >= law.v_set) return (law.r_on - r) / law.tau_switch;
  if (v <= law.v_reset) return (law.r_off - r) / law.tau_switch;
  return 0.0;
}

MemristanceUpdate memristance_step(const NeuronNetworkState& state,
                                   const MemristanceLaw& law, std::size_t index,
                                   double dt) {
  require(dt > 0.0 && std::isfinite(dt), "memristance_step: dt must be > 0");
  const double v = driving_voltage(state, index);
  if (!std::isfinite(v)) {
    throw IntegrationFault(state.t, "non-finite voltage driving memristor " +
                                        std::to_string(index + 1));
  }
  const double r = state.r_mem[index];
  const double rate = memristance_rate(v, r, law);
  double target = r;
  if (v >= law.v_set) {
    target = law.r_on;
  } else if (v <= law.v_reset) {
    target = law.r_off;
  }
  const double next = target + (r - target) * std::exp(-dt / law.tau_switch);
  return {std::clamp(next, law.r_on, law.r_off), rate};
}

Derivative ode_rhs(const NeuronNetworkState& state,
                   const NeuronCircuitParams& params) {
  Derivative d{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double v = driving_voltage(state, i);
    if (!std::isfinite(v)) {
      throw IntegrationFault(state.t, "non-finite voltage in circuit state");
    }
    d.dr[i] = memristance_rate(v, state.r_mem[i], params.mem_laws[i]);
  }
  const NeuronSide n1{params.c1, params.c2, params.r3, params.r4, params.k1_coupled};
  const NeuronSide n2{params.c5, params.c6, params.r5, params.r6, params.k2_coupled};

  d.dv1 = state.dv1;
  d.ddv1 = neuron_accel(state.v1, state.dv1, state.r_mem[0], state.r_mem[1],
                        d.dr[1], n1, state.v2);
  d.dv2 = state.dv2;
  d.ddv2 = neuron_accel(state.v2, state.dv2, state.r_mem[2], state.r_mem[3],
                        d.dr[3], n2, state.v1);
  return d;
}

std::array<SpikeTrain, 2> simulate(const NeuronCircuitParams& params,
                                   const NeuronNetworkState& initial, double dt,
                                   double t_end) {
  params.validate();
  require(dt > 0.0 && std::isfinite(dt), "simulate: dt must be > 0");
  require(std::isfinite(t_end) && t_end >= dt, "simulate: t_end must be >= dt");
  if (!initial.finite()) {
    throw IntegrationFault(initial.t, "initial circuit state is not finite");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& law = params.mem_laws[i];
    require(initial.r_mem[i] >= law.r_on && initial.r_mem[i] <= law.r_off,
            "initial R_Mem" + std::to_string(i + 1) + " outside [r_on, r_off]");
  }

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));

  std::array<SpikeTrain, 2> trains;
  for (auto& tr : trains) {
    tr.t0 = initial.t;
    tr.dt = dt;
    tr.v.reserve(steps + 1);
  }
  Vec8 y = pack(initial);
  trains[0].v.push_back(y[0]);
  trains[1].v.push_back(y[2]);

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = initial.t + static_cast<double>(n) * dt;
    const Vec8 k1 = rhs_vec(y, t, params);
    const Vec8 k2 = rhs_vec(axpy(y, 0.5 * dt, k1), t + 0.5 * dt, params);
    const Vec8 k3 = rhs_vec(axpy(y, 0.5 * dt, k2), t + 0.5 * dt, params);
    const Vec8 k4 = rhs_vec(axpy(y, dt, k3), t + dt, params);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      y[4 + i] = std::clamp(y[4 + i], params.mem_laws[i].r_on,
                            params.mem_laws[i].r_off);
    }
    const double t_next = initial.t + static_cast<double>(n + 1) * dt;
    if (!std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); })) {
      throw IntegrationFault(t_next, "non-finite circuit state at t = " +
                                         std::to_string(t_next));
    }
    trains[0].v.push_back(y[0]);
    trains[1].v.push_back(y[2]);
  }
  return trains;
}

SpikeCount count_spikes(const SpikeTrain& train, double threshold) {
  if (train.v.empty()) throw Error(Errc::empty_input, "count_spikes: empty train");
  SpikeCount out;
  bool in_run = false;
  Spike best{};
  for (std::size_t i = 0; i < train.v.size(); ++i) {
    const double v = train.v[i];
    if (v >= threshold) {
      if (!in_run || v > best.v_peak) best = {train.time(i), v};
      in_run = true;
    } else if (in_run) {
      out.spikes.push_back(best);
      in_run = false;
    }
  }
  if (in_run) out.spikes.push_back(best);
  out.count = out.spikes.size();
  return out;
}

std::vector<PortraitPoint> phase_portrait(const SpikeTrain& train) {
  const auto& v = train.v;
  const std::size_t n = v.size();
  if (n < 5) {
    throw Error(Errc::insufficient_data, "phase_portrait needs at least 5 samples");
  }
  const double h = train.dt;
  const double h2 = h * h;
  std::vector<PortraitPoint> out(n);
  out[0] = {(-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = {(v[i + 1] - v[i - 1]) / (2.0 * h),
              (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2};
  }
  const std::size_t e = n - 1;
  out[e] = {(3.0 * v[e] - 4.0 * v[e - 1] + v[e - 2]) / (2.0 * h),
            (2.0 * v[e] - 5.0 * v[e - 1] + 4.0 * v[e - 2] - v[e - 3]) / h2};
  return out;
}

}  // namespace qsnn::spiking

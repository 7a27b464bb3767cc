#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "qsnn/quantum.hpp"

namespace qsnn::entangled {

using quantum::ComplexOperator;
using quantum::DensityMatrix;

/// One interval of the pairwise coupling. Two-qubit basis is q1 (x) q2 with
/// each factor ordered (g, e): index = 2 * q1 + q2.
struct CouplingEntry {
  double t_start;
  double t_end;
  double j_exchange;
  std::array<double, 2> drive{0.0, 0.0};  // A_1, A_2
  std::array<double, 2> theta{0.0, 0.0};  // theta_k1, theta_k2
};

struct TwoQubitCouplingSchedule {
  std::vector<CouplingEntry> entries;
  double tau_e = 1.0;

  const CouplingEntry* active(double t) const;
  void validate() const;
};

/// Lowering operators sigma_q1 = sigma (x) I and sigma_q2 = I (x) sigma.
ComplexOperator qubit1_lowering();
ComplexOperator qubit2_lowering();

ComplexOperator coupled_hamiltonian(double t, const TwoQubitCouplingSchedule& sched);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// Reduced states of the two-qubit register.
DensityMatrix reduce_to_qubit1(const DensityMatrix& rho);
DensityMatrix reduce_to_qubit2(const DensityMatrix& rho);

struct G1Series {
  std::vector<double> tau;
  std::vector<std::complex<double>> raw;  // <sigma^dag(t + tau) sigma(t)>
  std::vector<double> normalized;         // |raw / raw(0)|; empty when undefined
  bool normalization_defined = false;
};

/// First-order correlation via the quantum regression procedure: Lambda(0) =
/// sigma rho(t0) is propagated by the same generator from t0 and read out as
/// tr(sigma^dag Lambda(tau)). The tau grid is tau_k = k * tau_step,
/// k = 0..count-1, integrated at step dt.
G1Series g1_correlation(const quantum::LindbladGenerator& gen, const ComplexOperator& sigma,
                        const DensityMatrix& rho_t, double t0, double tau_step,
                        std::size_t count, double dt);

/// Mean of the normalized |g1| series with each sample capped at 1; 0 when
/// normalization is undefined.
double sustained_correlation(const G1Series& g1);

struct MixtureWeights {
  std::array<double, 3> w{1.0 / 3.0, 1.0 / 2.0, 1.0 / 6.0};

  void validate() const;
};

DensityMatrix mix_density_matrices(std::span<const DensityMatrix, 3> rhos,
                                   const MixtureWeights& weights);

}  // namespace qsnn::entangled

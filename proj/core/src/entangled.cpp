#include "qsnn/entangled.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qsnn/error.hpp"

namespace qsnn::entangled {
namespace {

using quantum::Complex;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

ComplexOperator kron2(const ComplexOperator& a, const ComplexOperator& b) {
  ComplexOperator out(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
  }
  return out;
}

ComplexOperator sigma() {
  ComplexOperator s = ComplexOperator::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

}  // namespace

const CouplingEntry* TwoQubitCouplingSchedule::active(double t) const {
  auto it = std::upper_bound(entries.begin(), entries.end(), t,
                             [](double x, const CouplingEntry& e) { return x < e.t_start; });
  if (it == entries.begin()) return nullptr;
  --it;
  return t < it->t_end ? &*it : nullptr;
}

void TwoQubitCouplingSchedule::validate() const {
  require(std::isfinite(tau_e) && tau_e > 0.0, "coupling schedule tau_e must be > 0");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const std::string at = "coupling entry " + std::to_string(k);
    require(std::isfinite(e.t_start) && e.t_end > e.t_start, at + " has an empty interval");
    require(e.j_exchange >= 0.0 && e.drive[0] >= 0.0 && e.drive[1] >= 0.0,
            at + " rates must be >= 0");
    if (k > 0) {
      require(entries[k - 1].t_end <= e.t_start,
              "coupling entries must be sorted and non-overlapping");
    }
  }
}

ComplexOperator qubit1_lowering() { return kron2(sigma(), ComplexOperator::Identity(2, 2)); }
ComplexOperator qubit2_lowering() { return kron2(ComplexOperator::Identity(2, 2), sigma()); }

ComplexOperator coupled_hamiltonian(double t, const TwoQubitCouplingSchedule& sched) {
  require(t >= 0.0, "coupled_hamiltonian: t must be >= 0");
  ComplexOperator H = ComplexOperator::Zero(4, 4);
  const CouplingEntry* e = sched.active(t);
  if (e == nullptr) return H;
  const ComplexOperator s1 = qubit1_lowering();
  const ComplexOperator s2 = qubit2_lowering();
  H -= e->j_exchange * (s1.adjoint() * s2 + s1 * s2.adjoint());
  const double chirp = std::sin((t / sched.tau_e) * (t / sched.tau_e));
  const std::array<const ComplexOperator*, 2> lows{&s1, &s2};
  for (int q = 0; q < 2; ++q) {
    const double amp = e->drive[q] * std::cos(0.5 * e->theta[q]) * chirp;
    H -= amp * (lows[q]->adjoint() + *lows[q]);
  }
  return H;
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw Error(Errc::shape, "concurrence expects a 4x4 two-qubit state");
  ComplexOperator yy = ComplexOperator::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const ComplexOperator& m = rho.matrix();
  const ComplexOperator r = m * yy * m.conjugate() * yy;
  Eigen::ComplexEigenSolver<ComplexOperator> es(r, false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::clamp(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0);
}

DensityMatrix reduce_to_qubit1(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw Error(Errc::shape, "expected a two-qubit state");
  const auto& m = rho.matrix();
  ComplexOperator out(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out(a, b) = m(2 * a, 2 * b) + m(2 * a + 1, 2 * b + 1);
  }
  return DensityMatrix::from_unchecked(out);
}

DensityMatrix reduce_to_qubit2(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw Error(Errc::shape, "expected a two-qubit state");
  const auto& m = rho.matrix();
  ComplexOperator out(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out(a, b) = m(a, b) + m(2 + a, 2 + b);
  }
  return DensityMatrix::from_unchecked(out);
}

G1Series g1_correlation(const quantum::LindbladGenerator& gen, const ComplexOperator& sigma,
                        const DensityMatrix& rho_t, double t0, double tau_step,
                        std::size_t count, double dt) {
  require(count >= 1, "g1_correlation: tau grid is empty");
  if (sigma.rows() != rho_t.dim() || rho_t.dim() != gen.dim()) {
    throw Error(Errc::shape, "g1_correlation: dimension mismatch");
  }
  const std::size_t stride = count > 1 ? quantum::step_count(dt, tau_step) : 1;
  require(stride >= 1, "g1_correlation: tau step must be a positive multiple of dt");

  const ComplexOperator lambda0 = sigma * rho_t.matrix();
  const auto snaps =
      quantum::propagate_linear(lambda0, gen, t0, dt, (count - 1) * stride, stride);
  const ComplexOperator sigma_dag = sigma.adjoint();

  G1Series out;
  out.tau.reserve(count);
  out.raw.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.tau.push_back(static_cast<double>(k) * tau_step);
    out.raw.push_back((sigma_dag * snaps[k]).trace());
  }
  const double norm = std::abs(out.raw.front());
  out.normalization_defined = norm > 1e-14;
  if (out.normalization_defined) {
    out.normalized.reserve(count);
    for (const auto& g : out.raw) out.normalized.push_back(std::abs(g) / norm);
  }
  return out;
}

double sustained_correlation(const G1Series& g1) {
  if (!g1.normalization_defined || g1.normalized.empty()) return 0.0;
  double s = 0.0;
  // A non-stationary state can push |g1(tau)| above its tau = 0 value; such
  // samples count as fully coherent.
  for (double v : g1.normalized) s += std::min(v, 1.0);
  return std::clamp(s / static_cast<double>(g1.normalized.size()), 0.0, 1.0);
}

void MixtureWeights::validate() const {
  double sum = 0.0;
  for (double x : w) {
    if (!(std::isfinite(x) && x >= 0.0)) {
      throw Error(Errc::config, "mixture weights must be >= 0");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(Errc::config, "mixture weights must sum to 1");
  }
}

DensityMatrix mix_density_matrices(std::span<const DensityMatrix, 3> rhos,
                                   const MixtureWeights& weights) {
  weights.validate();
  ComplexOperator out = ComplexOperator::Zero(2, 2);
  for (std::size_t k = 0; k < 3; ++k) {
    if (rhos[k].dim() != 2) throw Error(Errc::shape, "mixture inputs must be 2x2");
    out += weights.w[k] * rhos[k].matrix();
  }
  return DensityMatrix::from_matrix(std::move(out));
}

}  // namespace qsnn::entangled

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qsnn::quantum {

using Complex = std::complex<double>;
using ComplexOperator = Eigen::MatrixXcd;

/// Cavity truncation. Basis ordering is qubit-major: (g, e) then n = 0..n_max,
/// so basis index = qubit * (n_max + 1) + n with g = 0, e = 1.
struct FockConfig {
  int n_max = 4;

  int fock_dim() const { return n_max + 1; }
  int dim() const { return 2 * (n_max + 1); }
  void validate() const;
};

/// Hermitian, unit-trace, positive semidefinite matrix. Construction through
/// `from_matrix` checks the invariants; `from_unchecked` skips them.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kEigenTol = 1e-9;

  DensityMatrix() = default;

  static DensityMatrix from_matrix(ComplexOperator m);
  static DensityMatrix from_unchecked(ComplexOperator m);
  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix basis_state(int dim, int index);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexOperator& matrix() const { return m_; }

  double hermiticity_residual() const;
  double trace_error() const;
  double min_eigenvalue() const;
  double purity() const;

 private:
  explicit DensityMatrix(ComplexOperator m) : m_(std::move(m)) {}
  ComplexOperator m_;
};

struct ThetaEntry {
  double t_start;
  double t_end;
  double theta;  // radians in [0, 2*pi)
};

/// Piecewise-constant rotation angles; an entry contributes only on
/// [t_start, t_end).
struct ThetaSchedule {
  std::vector<ThetaEntry> entries;

  std::size_t size() const { return entries.size(); }
  const ThetaEntry* active(double t) const;
  void validate() const;
};

struct HamiltonianParams {
  double g = 1.0;          // qubit-cavity exchange rate
  double drive_amp = 0.0;  // A
  double tau_e = 1.0;      // time scale of the sin((t / tau_e)^2) drive
  ThetaSchedule theta_schedule;

  void validate() const;
};

struct CollapseChannel {
  ComplexOperator op;
  double rate = 0.0;
};

using HamiltonianFn = std::function<ComplexOperator(double)>;

ComplexOperator annihilation_op(const FockConfig& cfg);
ComplexOperator lowering_op(const FockConfig& cfg);

/// Operators of the qubit-cavity model, built once and reused.
class QubitCavity {
 public:
  explicit QubitCavity(const FockConfig& cfg);

  const FockConfig& config() const { return cfg_; }
  int dim() const { return cfg_.dim(); }
  const ComplexOperator& a() const { return a_; }
  const ComplexOperator& sigma() const { return sigma_; }

  ComplexOperator hamiltonian(double t, const HamiltonianParams& p) const;

  /// Qubit decay (rate 1/t1) and cavity decay (rate kappa); zero-rate
  /// channels are omitted.
  std::vector<CollapseChannel> default_channels(double t1, double kappa) const;

 private:
  FockConfig cfg_;
  ComplexOperator a_;
  ComplexOperator sigma_;
  ComplexOperator exchange_;  // sigma^dag a + a^dag sigma
  ComplexOperator drive_;     // sigma^dag + sigma
};

ComplexOperator hamiltonian_at(double t, const HamiltonianParams& p,
                               const FockConfig& cfg);

/// d(rho)/dt = -i[H, rho] + sum_j rate_j (L rho L^dag - 1/2 {L^dag L, rho}).
ComplexOperator lindblad_rhs(const ComplexOperator& rho, const ComplexOperator& H,
                             std::span<const CollapseChannel> channels);

/// Lindblad generator with the anti-commutator folded into a non-Hermitian
/// effective Hamiltonian. Works on any square matrix, not only states.
class LindbladGenerator {
 public:
  LindbladGenerator(HamiltonianFn hamiltonian, std::vector<CollapseChannel> channels,
                    int dim);

  int dim() const { return dim_; }
  ComplexOperator hamiltonian(double t) const { return hamiltonian_(t); }
  ComplexOperator apply(const ComplexOperator& rho, const ComplexOperator& H) const;

  /// One classic RK4 step of length dt starting at time t.
  ComplexOperator rk4_step(const ComplexOperator& x, double t, double dt) const;

 private:
  HamiltonianFn hamiltonian_;
  std::vector<CollapseChannel> channels_;
  ComplexOperator damping_;  // sum_j rate_j L_j^dag L_j
  int dim_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  double max_trace_correction = 0.0;  // largest |tr(rho) - 1| removed by renormalization
};

/// Number of steps covering [0, t_end] at spacing dt. Throws when t_end is not
/// an integer multiple of dt to within 1e-9 relative.
std::size_t step_count(double dt, double t_end);

/// RK4 with Hermitization and trace renormalization after every step.
/// Records the initial state, then every `record_stride` steps, and the final
/// step if it is not already on the stride.
Trajectory evolve_generator(const DensityMatrix& rho0, const LindbladGenerator& gen,
                            double t0, double dt, double t_end,
                            std::size_t record_stride);

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianParams& p,
                  std::span<const CollapseChannel> channels, double dt, double t_end,
                  std::size_t record_stride);

/// Linear RK4 propagation without any state projection, for operators that are
/// not density matrices. Returns the matrix every `stride` steps including t0.
std::vector<ComplexOperator> propagate_linear(const ComplexOperator& x0,
                                              const LindbladGenerator& gen,
                                              double t0, double dt,
                                              std::size_t steps,
                                              std::size_t stride);

ComplexOperator partial_trace_to_qubit(const ComplexOperator& rho, int fock_dim);
DensityMatrix partial_trace_to_qubit(const DensityMatrix& rho, const FockConfig& cfg);

/// (tr rho sx, tr rho sy, tr rho sz) in the (g, e) basis, so |e><e| -> (0, 0, -1).
std::array<double, 3> bloch_vector(const DensityMatrix& rho_q);

/// Pure qubit state with the given Bloch direction (unit vector).
DensityMatrix qubit_state_from_bloch(const std::array<double, 3>& r);

/// rho_q (x) |0><0| on the qubit-cavity space.
DensityMatrix with_cavity_vacuum(const DensityMatrix& rho_q, const FockConfig& cfg);

}  // namespace qsnn::quantum

#include "qsnn/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "qsnn/error.hpp"

namespace qsnn::quantum {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

ComplexOperator kron(const ComplexOperator& a, const ComplexOperator& b) {
  ComplexOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexOperator fock_annihilation(int fock_dim) {
  ComplexOperator a = ComplexOperator::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

ComplexOperator qubit_lowering() {
  ComplexOperator s = ComplexOperator::Zero(2, 2);
  s(0, 1) = 1.0;  // |g><e|
  return s;
}

ComplexOperator hermitize(const ComplexOperator& m) {
  return 0.5 * (m + m.adjoint());
}

}  // namespace

void FockConfig::validate() const {
  require(n_max >= 1, "fock n_max must be >= 1");
}

DensityMatrix DensityMatrix::from_matrix(ComplexOperator m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(Errc::shape, "density matrix must be square and non-empty");
  }
  if (!m.allFinite()) throw Error(Errc::invalid_argument, "density matrix has non-finite entries");
  DensityMatrix rho(std::move(m));
  if (rho.hermiticity_residual() >= kHermitianTol) {
    throw Error(Errc::invalid_argument, "density matrix is not Hermitian");
  }
  if (rho.trace_error() > kTraceTol) {
    throw Error(Errc::invalid_argument, "density matrix trace differs from 1");
  }
  if (rho.min_eigenvalue() < -kEigenTol) {
    throw Error(Errc::invalid_argument, "density matrix has a negative eigenvalue");
  }
  return rho;
}

DensityMatrix DensityMatrix::from_unchecked(ComplexOperator m) {
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  require(norm > 0.0, "pure state vector must be non-zero");
  const Eigen::VectorXcd u = psi / norm;
  return from_matrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
  require(index >= 0 && index < dim, "basis index out of range");
  ComplexOperator m = ComplexOperator::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  require(dim > 0, "dimension must be positive");
  return DensityMatrix(ComplexOperator::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::hermiticity_residual() const {
  if (m_.size() == 0) return 0.0;
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::trace_error() const {
  return std::abs(m_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexOperator> es(hermitize(m_),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

const ThetaEntry* ThetaSchedule::active(double t) const {
  auto it = std::upper_bound(entries.begin(), entries.end(), t,
                             [](double x, const ThetaEntry& e) { return x < e.t_start; });
  if (it == entries.begin()) return nullptr;
  --it;
  return t < it->t_end ? &*it : nullptr;
}

void ThetaSchedule::validate() const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    require(std::isfinite(e.t_start) && e.t_end > e.t_start,
            "theta schedule entry " + std::to_string(k) + " has an empty interval");
    require(e.theta >= 0.0 && e.theta < two_pi,
            "theta schedule entry " + std::to_string(k) + " theta outside [0, 2pi)");
    if (k > 0) {
      require(entries[k - 1].t_end <= e.t_start,
              "theta schedule entries must be sorted and non-overlapping");
    }
  }
}

void HamiltonianParams::validate() const {
  require(std::isfinite(g) && g >= 0.0, "quantum.g must be >= 0");
  require(std::isfinite(drive_amp) && drive_amp >= 0.0, "quantum.drive_amp must be >= 0");
  require(std::isfinite(tau_e) && tau_e > 0.0, "quantum.tau_e must be > 0");
  theta_schedule.validate();
}

ComplexOperator annihilation_op(const FockConfig& cfg) {
  cfg.validate();
  return kron(ComplexOperator::Identity(2, 2), fock_annihilation(cfg.fock_dim()));
}

ComplexOperator lowering_op(const FockConfig& cfg) {
  cfg.validate();
  return kron(qubit_lowering(), ComplexOperator::Identity(cfg.fock_dim(), cfg.fock_dim()));
}

QubitCavity::QubitCavity(const FockConfig& cfg)
    : cfg_(cfg), a_(annihilation_op(cfg)), sigma_(lowering_op(cfg)) {
  exchange_ = sigma_.adjoint() * a_ + a_.adjoint() * sigma_;
  drive_ = sigma_.adjoint() + sigma_;
}

ComplexOperator QubitCavity::hamiltonian(double t, const HamiltonianParams& p) const {
  ComplexOperator H = ComplexOperator::Zero(dim(), dim());
  const ThetaEntry* e = p.theta_schedule.active(t);
  if (e == nullptr) return H;
  const double half = 0.5 * e->theta;
  const double chirp = std::sin((t / p.tau_e) * (t / p.tau_e));
  H.noalias() -= (p.g * std::sin(half)) * exchange_;
  H.noalias() -= (p.drive_amp * std::cos(half) * chirp) * drive_;
  return H;
}

std::vector<CollapseChannel> QubitCavity::default_channels(double t1, double kappa) const {
  std::vector<CollapseChannel> out;
  if (std::isfinite(t1) && t1 > 0.0) out.push_back({sigma_, 1.0 / t1});
  if (kappa > 0.0) out.push_back({a_, kappa});
  return out;
}

ComplexOperator hamiltonian_at(double t, const HamiltonianParams& p,
                               const FockConfig& cfg) {
  require(t >= 0.0, "hamiltonian_at: t must be >= 0");
  return QubitCavity(cfg).hamiltonian(t, p);
}

ComplexOperator lindblad_rhs(const ComplexOperator& rho, const ComplexOperator& H,
                             std::span<const CollapseChannel> channels) {
  const auto d = rho.rows();
  if (rho.cols() != d || H.rows() != d || H.cols() != d) {
    throw Error(Errc::shape, "lindblad_rhs: dimension mismatch");
  }
  const Complex i(0.0, 1.0);
  ComplexOperator out = -i * (H * rho - rho * H);
  for (const auto& ch : channels) {
    if (ch.op.rows() != d || ch.op.cols() != d) {
      throw Error(Errc::shape, "lindblad_rhs: collapse operator dimension mismatch");
    }
    const ComplexOperator LdL = ch.op.adjoint() * ch.op;
    out += ch.rate * (ch.op * rho * ch.op.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  }
  return out;
}

LindbladGenerator::LindbladGenerator(HamiltonianFn hamiltonian,
                                     std::vector<CollapseChannel> channels, int dim)
    : hamiltonian_(std::move(hamiltonian)),
      channels_(std::move(channels)),
      damping_(ComplexOperator::Zero(dim, dim)),
      dim_(dim) {
  for (const auto& ch : channels_) {
    if (ch.op.rows() != dim || ch.op.cols() != dim) {
      throw Error(Errc::shape, "collapse operator dimension mismatch");
    }
    require(std::isfinite(ch.rate) && ch.rate >= 0.0, "collapse rate must be >= 0");
    damping_ += ch.rate * (ch.op.adjoint() * ch.op);
  }
}

ComplexOperator LindbladGenerator::apply(const ComplexOperator& rho,
                                         const ComplexOperator& H) const {
  const Complex i(0.0, 1.0);
  const ComplexOperator heff = H - (0.5 * i) * damping_;
  ComplexOperator out(dim_, dim_);
  out.noalias() = -i * (heff * rho);
  out.noalias() += i * (rho * heff.adjoint());
  for (const auto& ch : channels_) {
    out.noalias() += ch.rate * (ch.op * rho * ch.op.adjoint());
  }
  return out;
}

ComplexOperator LindbladGenerator::rk4_step(const ComplexOperator& x, double t,
                                            double dt) const {
  // One-sided limits at both ends of the step (up to rounding in t), so a
  // piecewise-constant schedule switching on a grid point stays out of it.
  const double edge = 1e-9 * dt;
  const ComplexOperator h0 = hamiltonian_(t + edge);
  const ComplexOperator hm = hamiltonian_(t + 0.5 * dt);
  const ComplexOperator h1 = hamiltonian_(t + dt - edge);
  const ComplexOperator k1 = apply(x, h0);
  const ComplexOperator k2 = apply(x + (0.5 * dt) * k1, hm);
  const ComplexOperator k3 = apply(x + (0.5 * dt) * k2, hm);
  const ComplexOperator k4 = apply(x + dt * k3, h1);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::size_t step_count(double dt, double t_end) {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(t_end) && t_end >= 0.0, "t_end must be >= 0");
  const double ratio = t_end / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(Errc::invalid_argument, "t_end must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

Trajectory evolve_generator(const DensityMatrix& rho0, const LindbladGenerator& gen,
                            double t0, double dt, double t_end,
                            std::size_t record_stride) {
  if (rho0.dim() != gen.dim()) throw Error(Errc::shape, "evolve: dimension mismatch");
  require(record_stride >= 1, "record_stride must be >= 1");
  const std::size_t steps = step_count(dt, t_end);

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(rho0);

  ComplexOperator rho = rho0.matrix();
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    rho = gen.rk4_step(rho, t, dt);
    const double tr = rho.trace().real();
    const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (!(drift <= 1e-6)) {
      throw Error(Errc::step_size, "trace drift " + std::to_string(drift) +
                                       " at t = " + std::to_string(t + dt) +
                                       "; reduce dt");
    }
    traj.max_trace_correction = std::max(traj.max_trace_correction, drift);
    rho = hermitize(rho) / tr;
    if (!rho.allFinite()) {
      throw IntegrationFault(t + dt, "non-finite density matrix");
    }
    if ((n + 1) % record_stride == 0 || n + 1 == steps) {
      traj.times.push_back(t0 + static_cast<double>(n + 1) * dt);
      traj.states.push_back(DensityMatrix::from_unchecked(rho));
    }
  }
  return traj;
}

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianParams& p,
                  std::span<const CollapseChannel> channels, double dt, double t_end,
                  std::size_t record_stride) {
  p.validate();
  const int dim = rho0.dim();
  if (dim < 4 || dim % 2 != 0) {
    throw Error(Errc::shape, "evolve: qubit-cavity state must have even dimension >= 4");
  }
  auto model = std::make_shared<QubitCavity>(FockConfig{dim / 2 - 1});
  LindbladGenerator gen([model, p](double t) { return model->hamiltonian(t, p); },
                        {channels.begin(), channels.end()}, dim);
  return evolve_generator(rho0, gen, 0.0, dt, t_end, record_stride);
}

std::vector<ComplexOperator> propagate_linear(const ComplexOperator& x0,
                                              const LindbladGenerator& gen,
                                              double t0, double dt,
                                              std::size_t steps,
                                              std::size_t stride) {
  if (x0.rows() != gen.dim() || x0.cols() != gen.dim()) {
    throw Error(Errc::shape, "propagate_linear: dimension mismatch");
  }
  require(stride >= 1, "stride must be >= 1");
  std::vector<ComplexOperator> out{x0};
  ComplexOperator x = x0;
  for (std::size_t n = 0; n < steps; ++n) {
    x = gen.rk4_step(x, t0 + static_cast<double>(n) * dt, dt);
    if (!x.allFinite()) {
      throw IntegrationFault(t0 + static_cast<double>(n + 1) * dt,
                             "non-finite operator during propagation");
    }
    if ((n + 1) % stride == 0) out.push_back(x);
  }
  return out;
}

ComplexOperator partial_trace_to_qubit(const ComplexOperator& rho, int fock_dim) {
  if (rho.rows() != 2 * fock_dim || rho.cols() != 2 * fock_dim) {
    throw Error(Errc::shape, "partial_trace_to_qubit: dimension mismatch");
  }
  ComplexOperator out(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Complex s(0.0, 0.0);
      for (int n = 0; n < fock_dim; ++n) s += rho(a * fock_dim + n, b * fock_dim + n);
      out(a, b) = s;
    }
  }
  return out;
}

DensityMatrix partial_trace_to_qubit(const DensityMatrix& rho, const FockConfig& cfg) {
  if (rho.dim() != cfg.dim()) {
    throw Error(Errc::shape, "partial_trace_to_qubit: dim != 2 (n_max + 1)");
  }
  return DensityMatrix::from_unchecked(partial_trace_to_qubit(rho.matrix(), cfg.fock_dim()));
}

std::array<double, 3> bloch_vector(const DensityMatrix& rho_q) {
  if (rho_q.dim() != 2) throw Error(Errc::shape, "bloch_vector expects a 2x2 state");
  const auto& m = rho_q.matrix();
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

DensityMatrix qubit_state_from_bloch(const std::array<double, 3>& r) {
  ComplexOperator m(2, 2);
  const Complex i(0.0, 1.0);
  m(0, 0) = 0.5 * (1.0 + r[2]);
  m(1, 1) = 0.5 * (1.0 - r[2]);
  m(0, 1) = 0.5 * (r[0] - i * r[1]);
  m(1, 0) = 0.5 * (r[0] + i * r[1]);
  return DensityMatrix::from_matrix(std::move(m));
}

DensityMatrix with_cavity_vacuum(const DensityMatrix& rho_q, const FockConfig& cfg) {
  if (rho_q.dim() != 2) throw Error(Errc::shape, "with_cavity_vacuum expects a qubit state");
  ComplexOperator vac = ComplexOperator::Zero(cfg.fock_dim(), cfg.fock_dim());
  vac(0, 0) = 1.0;
  return DensityMatrix::from_unchecked(kron(rho_q.matrix(), vac));
}

}  // namespace qsnn::quantum

#include "qsnn/nonmarkov.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <future>
#include <memory>
#include <numbers>

#include "json.hpp"
#include "qsnn/error.hpp"

namespace qsnn::nonmarkov {
namespace {

using quantum::Complex;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

int sqrt_dim(Eigen::Index n) {
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<Eigen::Index>(d) * d != n) {
    throw Error(Errc::shape, "superoperator size is not a square dimension");
  }
  return d;
}

ComplexOperator hermitize(const ComplexOperator& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

Eigen::VectorXcd vectorize(const ComplexOperator& m) {
  const auto d = m.rows();
  Eigen::VectorXcd v(d * m.cols());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  }
  return v;
}

ComplexOperator unvectorize(const Eigen::VectorXcd& v) {
  const int d = sqrt_dim(v.size());
  ComplexOperator m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  }
  return m;
}

ComplexOperator apply_superoperator(const Superoperator& s, const ComplexOperator& m) {
  if (s.cols() != m.size() || s.rows() != s.cols()) {
    throw Error(Errc::shape, "superoperator does not match operand dimension");
  }
  return unvectorize(s * vectorize(m));
}

int DynamicalMapSeries::state_dim() const {
  return maps.empty() ? 0 : sqrt_dim(maps.front().rows());
}

int TransferTensorSeries::state_dim() const {
  return tensors.empty() ? 0 : sqrt_dim(tensors.front().rows());
}

DynamicalMapSeries learn_maps(const quantum::HamiltonianParams& p,
                              std::span<const quantum::CollapseChannel> channels,
                              const quantum::FockConfig& cfg, double dt, double dt_map,
                              std::size_t depth, MapSpace space) {
  require(depth >= 1, "learn_maps: at least one map (K >= 1) is required");
  require(dt > 0.0 && dt_map > 0.0, "learn_maps: dt and dt_map must be > 0");
  const std::size_t sub = quantum::step_count(dt, dt_map);
  require(sub >= 1, "learn_maps: dt_map must be an integer multiple of dt");
  p.validate();
  cfg.validate();

  auto model = std::make_shared<quantum::QubitCavity>(cfg);
  const quantum::LindbladGenerator gen(
      [model, p](double t) { return model->hamiltonian(t, p); },
      {channels.begin(), channels.end()}, cfg.dim());

  const int d = space == MapSpace::full ? cfg.dim() : 2;
  const auto d2 = static_cast<Eigen::Index>(d) * d;

  ComplexOperator vacuum = ComplexOperator::Zero(cfg.fock_dim(), cfg.fock_dim());
  vacuum(0, 0) = 1.0;
  auto embed = [&](const ComplexOperator& x) -> ComplexOperator {
    if (space == MapSpace::full) return x;
    ComplexOperator out = ComplexOperator::Zero(cfg.dim(), cfg.dim());
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        out.block(a * cfg.fock_dim(), b * cfg.fock_dim(), cfg.fock_dim(), cfg.fock_dim()) =
            x(a, b) * vacuum;
      }
    }
    return out;
  };
  auto reduce = [&](const ComplexOperator& x) -> ComplexOperator {
    if (space == MapSpace::full) return x;
    return quantum::partial_trace_to_qubit(x, cfg.fock_dim());
  };
  auto run = [&](const ComplexOperator& x0) {
    auto snaps = quantum::propagate_linear(embed(x0), gen, 0.0, dt, depth * sub, sub);
    for (auto& s : snaps) s = reduce(s);
    return snaps;
  };

  DynamicalMapSeries out;
  out.dt_map = dt_map;
  out.maps.assign(depth + 1, Superoperator::Zero(d2, d2));

  auto set_column = [&](int i, int j, const std::vector<ComplexOperator>& snaps) {
    for (std::size_t n = 0; n <= depth; ++n) out.maps[n].col(i * d + j) = vectorize(snaps[n]);
  };

  // Hermitian basis: |i><i|, and X = (E_ij + E_ji)/2, Y = -i (E_ij - E_ji)/2 for
  // i < j, so that E_ij = X + iY and E_ji = X - iY.
  const Complex I(0.0, 1.0);
  for (int i = 0; i < d; ++i) {
    ComplexOperator e = ComplexOperator::Zero(d, d);
    e(i, i) = 1.0;
    set_column(i, i, run(e));
    for (int j = i + 1; j < d; ++j) {
      ComplexOperator x = ComplexOperator::Zero(d, d);
      x(i, j) = 0.5;
      x(j, i) = 0.5;
      ComplexOperator y = ComplexOperator::Zero(d, d);
      y(i, j) = -0.5 * I;
      y(j, i) = 0.5 * I;
      const auto sx = run(x);
      const auto sy = run(y);
      std::vector<ComplexOperator> eij(depth + 1), eji(depth + 1);
      for (std::size_t n = 0; n <= depth; ++n) {
        eij[n] = sx[n] + I * sy[n];
        eji[n] = sx[n] - I * sy[n];
      }
      set_column(i, j, eij);
      set_column(j, i, eji);
    }
  }
  out.maps[0] = Superoperator::Identity(d2, d2);
  return out;
}

TransferTensorSeries compute_transfer_tensors(const DynamicalMapSeries& maps) {
  require(maps.maps.size() >= 2, "compute_transfer_tensors needs E_0 and at least E_1");
  const auto n2 = maps.maps.front().rows();
  for (const auto& e : maps.maps) {
    if (e.rows() != n2 || e.cols() != n2) {
      throw Error(Errc::shape, "dynamical maps have inconsistent dimensions");
    }
  }
  TransferTensorSeries out;
  out.dt_map = maps.dt_map;
  const std::size_t depth = maps.maps.size() - 1;
  out.tensors.reserve(depth);
  for (std::size_t n = 1; n <= depth; ++n) {
    Superoperator t = maps.maps[n];
    for (std::size_t m = 1; m < n; ++m) t.noalias() -= out.tensors[m - 1] * maps.maps[n - m];
    out.tensors.push_back(std::move(t));
  }
  return out;
}

DynamicalMapSeries reconstruct_maps(const TransferTensorSeries& tensors, std::size_t count) {
  require(!tensors.tensors.empty(), "reconstruct_maps: no tensors");
  const auto n2 = tensors.tensors.front().rows();
  DynamicalMapSeries out;
  out.dt_map = tensors.dt_map;
  out.maps.push_back(Superoperator::Identity(n2, n2));
  for (std::size_t n = 1; n < count; ++n) {
    Superoperator e = Superoperator::Zero(n2, n2);
    for (std::size_t m = 1; m <= std::min(n, tensors.depth()); ++m) {
      e.noalias() += tensors.tensors[m - 1] * out.maps[n - m];
    }
    out.maps.push_back(std::move(e));
  }
  return out;
}

TtmResult ttm_propagate(const TransferTensorSeries& tensors,
                        std::span<const DensityMatrix> history, std::size_t steps) {
  const std::size_t depth = tensors.depth();
  require(depth >= 1, "ttm_propagate: empty transfer tensor series");
  if (history.size() < depth) {
    throw Error(Errc::insufficient_history,
                "ttm_propagate: history has " + std::to_string(history.size()) +
                    " states, memory depth is " + std::to_string(depth));
  }
  const int d = tensors.state_dim();
  TtmResult out;
  out.states.assign(history.begin(), history.end());
  std::vector<Eigen::VectorXcd> vecs;
  vecs.reserve(history.size() + steps);
  for (const auto& rho : history) {
    if (rho.dim() != d) throw Error(Errc::shape, "ttm_propagate: history dimension mismatch");
    vecs.push_back(vectorize(rho.matrix()));
  }
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t n = vecs.size();
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d) * d);
    for (std::size_t m = 1; m <= depth; ++m) next.noalias() += tensors.tensors[m - 1] * vecs[n - m];
    ComplexOperator rho = hermitize(unvectorize(next));
    const Complex tr = rho.trace();
    out.max_trace_correction = std::max(out.max_trace_correction, std::abs(tr - 1.0));
    rho /= tr.real();
    vecs.push_back(vectorize(rho));
    out.states.push_back(DensityMatrix::from_unchecked(std::move(rho)));
  }
  return out;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(Errc::shape, "trace_distance: dimension mismatch");
  const ComplexOperator diff = a.matrix() - b.matrix();
  const Eigen::JacobiSVD<ComplexOperator> svd(diff);
  return std::clamp(0.5 * svd.singularValues().sum(), 0.0, 1.0);
}

std::vector<StatePair> default_pair_set() {
  const double s = std::numbers::sqrt2 / 2.0;
  const std::array<std::pair<std::array<double, 3>, const char*>, 6> dirs{{
      {{1.0, 0.0, 0.0}, "+x/-x"},
      {{0.0, 1.0, 0.0}, "+y/-y"},
      {{0.0, 0.0, 1.0}, "+z/-z"},
      {{s, s, 0.0}, "+xy/-xy"},
      {{s, 0.0, s}, "+xz/-xz"},
      {{0.0, s, s}, "+yz/-yz"},
  }};
  std::vector<StatePair> out;
  for (const auto& [n, label] : dirs) {
    out.push_back({quantum::qubit_state_from_bloch(n),
                   quantum::qubit_state_from_bloch({-n[0], -n[1], -n[2]}), label});
  }
  return out;
}

NonMarkovianityReport blp_from_distance(std::span<const double> times,
                                        std::span<const double> distance) {
  if (times.size() != distance.size()) {
    throw Error(Errc::shape, "blp_from_distance: times and distances differ in length");
  }
  NonMarkovianityReport out;
  bool rising = false;
  for (std::size_t i = 0; i + 1 < distance.size(); ++i) {
    const double inc = distance[i + 1] - distance[i];
    if (inc > kRevivalTolerance) {
      out.level += inc;
      if (rising) {
        out.revival_intervals.back().t_end = times[i + 1];
      } else {
        out.revival_intervals.push_back({times[i], times[i + 1]});
      }
      rising = true;
    } else {
      rising = false;
    }
  }
  return out;
}

std::vector<double> pair_distance(const quantum::LindbladGenerator& gen,
                                  const quantum::FockConfig& cfg, const StatePair& pair,
                                  double dt, double t_end) {
  const auto a = quantum::evolve_generator(quantum::with_cavity_vacuum(pair.first, cfg), gen,
                                           0.0, dt, t_end, 1);
  const auto b = quantum::evolve_generator(quantum::with_cavity_vacuum(pair.second, cfg), gen,
                                           0.0, dt, t_end, 1);
  std::vector<double> d(a.states.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = trace_distance(quantum::partial_trace_to_qubit(a.states[i], cfg),
                          quantum::partial_trace_to_qubit(b.states[i], cfg));
  }
  return d;
}

NonMarkovianityReport blp_measure(const quantum::HamiltonianParams& p,
                                  std::span<const quantum::CollapseChannel> channels,
                                  const quantum::FockConfig& cfg,
                                  std::span<const StatePair> pair_set, double dt,
                                  double t_end) {
  require(!pair_set.empty(), "blp_measure: pair set is empty");
  p.validate();
  cfg.validate();
  const std::size_t steps = quantum::step_count(dt, t_end);
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) * dt;

  auto model = std::make_shared<quantum::QubitCavity>(cfg);
  const quantum::LindbladGenerator gen(
      [model, p](double t) { return model->hamiltonian(t, p); },
      {channels.begin(), channels.end()}, cfg.dim());

  std::vector<std::future<std::vector<double>>> jobs;
  jobs.reserve(pair_set.size());
  for (const auto& pair : pair_set) {
    jobs.push_back(std::async(std::launch::async, [&gen, &cfg, &pair, dt, t_end] {
      return pair_distance(gen, cfg, pair, dt, t_end);
    }));
  }

  NonMarkovianityReport best;
  bool first = true;
  for (std::size_t k = 0; k < pair_set.size(); ++k) {
    const auto d = jobs[k].get();
    auto report = blp_from_distance(times, d);
    report.pair_used = pair_set[k].label;
    if (first || report.level > best.level) {
      best = std::move(report);
      first = false;
    }
  }
  return best;
}

void save_series(const std::filesystem::path& bin_path,
                 const std::filesystem::path& sidecar_path, const std::string& kind,
                 double dt_map, std::span<const Superoperator> ops) {
  static_assert(std::endian::native == std::endian::little,
                "series blobs are written little-endian");
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(Errc::io, "cannot open " + bin_path.string());
  const Eigen::Index n = ops.empty() ? 0 : ops.front().rows();
  for (const auto& op : ops) {
    if (op.rows() != n || op.cols() != n) throw Error(Errc::shape, "save_series: ragged series");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double re = op(i, j).real();
        const double im = op(i, j).imag();
        bin.write(reinterpret_cast<const char*>(&re), sizeof re);
        bin.write(reinterpret_cast<const char*>(&im), sizeof im);
      }
    }
  }
  if (!bin) throw Error(Errc::io, "write failed: " + bin_path.string());

  nlohmann::ordered_json side;
  side["kind"] = kind;
  side["dims"] = {n, n};
  side["count"] = ops.size();
  side["dt_map"] = dt_map;
  side["K"] = kind == "maps" && !ops.empty() ? ops.size() - 1 : ops.size();
  side["layout"] = "row-major complex128 (re, im) little-endian";
  std::ofstream js(sidecar_path, std::ios::trunc);
  if (!js) throw Error(Errc::io, "cannot open " + sidecar_path.string());
  js << side.dump(2) << '\n';
}

LoadedSeries load_series(const std::filesystem::path& bin_path,
                         const std::filesystem::path& sidecar_path) {
  std::ifstream js(sidecar_path);
  if (!js) throw Error(Errc::io, "cannot open " + sidecar_path.string());
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, "malformed sidecar " + sidecar_path.string() + ": " + e.what());
  }
  LoadedSeries out;
  out.kind = side.at("kind").get<std::string>();
  out.dt_map = side.at("dt_map").get<double>();
  const auto n = side.at("dims").at(0).get<Eigen::Index>();
  const auto count = side.at("count").get<std::size_t>();

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(Errc::io, "cannot open " + bin_path.string());
  for (std::size_t k = 0; k < count; ++k) {
    Superoperator op(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double re = 0.0, im = 0.0;
        bin.read(reinterpret_cast<char*>(&re), sizeof re);
        bin.read(reinterpret_cast<char*>(&im), sizeof im);
        op(i, j) = Complex(re, im);
      }
    }
    if (!bin) throw Error(Errc::io, "truncated series blob " + bin_path.string());
    out.ops.push_back(std::move(op));
  }
  return out;
}

}  // namespace qsnn::nonmarkov

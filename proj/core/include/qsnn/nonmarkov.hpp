#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qsnn/quantum.hpp"

namespace qsnn::nonmarkov {

using quantum::ComplexOperator;
using quantum::DensityMatrix;

/// Superoperators act on row-major vectorized matrices: vec(rho)[i * d + j] = rho(i, j).
using Superoperator = Eigen::MatrixXcd;

Eigen::VectorXcd vectorize(const ComplexOperator& m);
ComplexOperator unvectorize(const Eigen::VectorXcd& v);
ComplexOperator apply_superoperator(const Superoperator& s, const ComplexOperator& m);

/// E_n with rho(t_n) = E_n[rho(0)], t_n = n * dt_map; maps[0] is the identity.
struct DynamicalMapSeries {
  double dt_map = 0.0;
  std::vector<Superoperator> maps;

  int state_dim() const;
};

struct TransferTensorSeries {
  double dt_map = 0.0;
  std::vector<Superoperator> tensors;  // tensors[m - 1] = T_m

  std::size_t depth() const { return tensors.size(); }
  int state_dim() const;
};

/// Which state space the maps act on: the full qubit-cavity space, or the
/// qubit alone with the cavity starting in vacuum and traced out afterwards.
enum class MapSpace { full, qubit };

DynamicalMapSeries learn_maps(const quantum::HamiltonianParams& p,
                              std::span<const quantum::CollapseChannel> channels,
                              const quantum::FockConfig& cfg, double dt, double dt_map,
                              std::size_t depth, MapSpace space = MapSpace::full);

TransferTensorSeries compute_transfer_tensors(const DynamicalMapSeries& maps);

/// Replays the transfer-tensor recursion forward: E_n = sum_{m=1}^{n} T_m E_{n-m}.
DynamicalMapSeries reconstruct_maps(const TransferTensorSeries& tensors, std::size_t count);

struct TtmResult {
  std::vector<DensityMatrix> states;  // history followed by propagated states
  double max_trace_correction = 0.0;
};

/// rho(t_n) = sum_{m=1}^{K} T_m[rho(t_{n-m})], Hermitized and renormalized.
TtmResult ttm_propagate(const TransferTensorSeries& tensors,
                        std::span<const DensityMatrix> history, std::size_t steps);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct StatePair {
  DensityMatrix first;
  DensityMatrix second;
  std::string label;
};

/// Six antipodal pure qubit pairs: the x, y, z axes and the xy, xz, yz diagonals.
std::vector<StatePair> default_pair_set();

struct Interval {
  double t_start;
  double t_end;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct NonMarkovianityReport {
  double level = 0.0;
  std::vector<Interval> revival_intervals;
  std::string pair_used;
};

/// Increments of D(t) at or below this are treated as numerical noise.
inline constexpr double kRevivalTolerance = 1e-10;

/// Sum of positive increments of a trace-distance series and the intervals
/// where it rises.
NonMarkovianityReport blp_from_distance(std::span<const double> times,
                                        std::span<const double> distance);

/// Evolves each qubit pair (with the cavity in vacuum), compares the reduced
/// qubit states at every step and reports the pair with the largest level.
NonMarkovianityReport blp_measure(const quantum::HamiltonianParams& p,
                                  std::span<const quantum::CollapseChannel> channels,
                                  const quantum::FockConfig& cfg,
                                  std::span<const StatePair> pair_set, double dt,
                                  double t_end);

/// Trace-distance history of one qubit pair under the qubit-cavity dynamics.
std::vector<double> pair_distance(const quantum::LindbladGenerator& gen,
                                  const quantum::FockConfig& cfg, const StatePair& pair,
                                  double dt, double t_end);

/// Flat little-endian complex<double> blob of all superoperators plus a JSON
/// sidecar {"kind", "dims", "dt_map", "K", "layout"}.
void save_series(const std::filesystem::path& bin_path,
                 const std::filesystem::path& sidecar_path, const std::string& kind,
                 double dt_map, std::span<const Superoperator> ops);

struct LoadedSeries {
  std::string kind;
  double dt_map = 0.0;
  std::vector<Superoperator> ops;
};

LoadedSeries load_series(const std::filesystem::path& bin_path,
                         const std::filesystem::path& sidecar_path);

}  // namespace qsnn::nonmarkov

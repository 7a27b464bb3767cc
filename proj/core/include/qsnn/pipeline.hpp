#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsnn/config.hpp"
#include "qsnn/decision.hpp"
#include "qsnn/nonmarkov.hpp"
#include "qsnn/quantum.hpp"
#include "qsnn/spiking.hpp"

namespace qsnn::pipeline {

/// One schedule entry per spike. Entry k spans [t_peak_k, t_peak_{k+1}); the
/// last one runs to `window_end`. A final spike at or after `window_end` has
/// no room left and gets no entry.
quantum::ThetaSchedule spike_to_theta(std::span<const spiking::Spike> spikes,
                                      const config::SpikeToThetaMap& map, double window_end);

/// Neuron-1 spikes from a `t_peak,v_peak,neuron_id` CSV.
std::vector<spiking::Spike> read_spike_list(const std::filesystem::path& path,
                                            int neuron_id = 1);

struct FileRecord {
  std::string path;  // relative to the run directory, '/' separated
  std::uintmax_t bytes = 0;
  std::string fnv1a;
};

/// Every artifact of a run goes through one writer so the manifest can list it.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& rel, const std::string& content);
  void write_csv(const std::string& rel, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);
  /// Registers a file some other routine already wrote under the root.
  void record(const std::string& rel);
  const std::vector<FileRecord>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<FileRecord> files_;
};

struct SpikeStage {
  std::array<spiking::SpikeTrain, 2> trains;
  spiking::SpikeCount neuron1;
  spiking::SpikeCount neuron2;
};

SpikeStage run_spike_stage(const config::RunConfig& cfg);
void write_spike_artifacts(RunWriter& w, const SpikeStage& s, bool with_portrait = false);

quantum::HamiltonianParams hamiltonian_params(const config::RunConfig& cfg,
                                              quantum::ThetaSchedule schedule);
std::vector<quantum::CollapseChannel> qubit_cavity_channels(const config::RunConfig& cfg);
quantum::DensityMatrix initial_qubit_state(const config::RunConfig& cfg);

void write_theta_schedule(RunWriter& w, const std::string& rel,
                          const quantum::ThetaSchedule& s);
/// `t,re_rho_i_j,im_rho_i_j...` over the upper triangle and `t,bloch_x,bloch_y,bloch_z`.
void write_trajectory(RunWriter& w, const std::string& prefix, const quantum::Trajectory& tr,
                      const quantum::FockConfig& fock);

struct TtmStage {
  nonmarkov::DynamicalMapSeries maps;
  nonmarkov::TransferTensorSeries tensors;
  std::vector<double> times;
  std::vector<double> error;  // trace distance TTM vs direct integration
  double max_error = 0.0;
};

/// Learns maps over K steps, then propagates to 2K and compares with direct
/// integration from the configured initial state. Maps are learned for the
/// dynamics of a single entry, so pass a stationary schedule.
TtmStage run_ttm_stage(const config::RunConfig& cfg, const quantum::HamiltonianParams& hp);

/// The final theta entry moved to start at t = 0 and held for the whole
/// TTM horizon; empty when there are no entries.
quantum::ThetaSchedule final_entry_schedule(const quantum::ThetaSchedule& s, double horizon);
void write_ttm_artifacts(RunWriter& w, const std::string& prefix, const TtmStage& s);

struct WindowSummary {
  std::size_t window = 0;
  double theta_max = 0.0;
  std::uint32_t q = 0;
  double level = 0.0;
  std::string pair_used;
  double correlation = 0.0;
  bool correlation_defined = false;
  double t_report = 0.0;
  std::array<double, 3> bloch{0.0, 0.0, 0.0};
  double ttm_max_error = 0.0;
  decision::AwarenessClass cls = decision::AwarenessClass::Unclassified;
  std::string directive;
};

struct RunManifest {
  bool ok = true;
  std::string failed_stage;
  std::string error;
  std::string config_hash;
  std::vector<FileRecord> files;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<WindowSummary> windows;
  std::size_t packets = 0;

  std::string to_json() const;
};

/// Runs every stage and writes all artifacts plus manifest.json into `out_dir`.
/// Module errors do not propagate; they mark the manifest as failed.
RunManifest run_pipeline(const config::RunConfig& cfg, const std::filesystem::path& out_dir);

/// Output root precedence: explicit flag, then QSNN_OUT, then io.out_dir.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const config::RunConfig& cfg);

/// Theta_max for the next window given this window's class.
double feedback_theta_max(const config::FeedbackPolicy& fb, decision::AwarenessClass cls,
                          double theta_max);

}  // namespace qsnn::pipeline

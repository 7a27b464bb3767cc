#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qsnn/decision.hpp"
#include "qsnn/entangled.hpp"
#include "qsnn/error.hpp"
#include "qsnn/nonmarkov.hpp"
#include "qsnn/quantum.hpp"
#include "qsnn/spiking.hpp"

namespace qsnn::config {

enum class ThetaMode { amplitude, index, constant };

/// How neuron-1 spikes become rotation angles.
struct SpikeToThetaMap {
  ThetaMode mode = ThetaMode::index;
  double theta_max = 3.141592653589793;

  friend bool operator==(const SpikeToThetaMap&, const SpikeToThetaMap&) = default;
};

struct SpikingRun {
  double dt = 1e-3;
  double t_end = 50.0;
  double threshold = 0.2;
  spiking::NeuronNetworkState initial{0.0, 1.0, 0.0, 0.0, 0.0, {1.0, 1.0, 1.0, 1.0}};
};

enum class InitialQubit { excited, ground, plus };

struct QuantumRun {
  quantum::FockConfig fock{};
  double g = 1.0;
  double drive_amp = 0.0;
  double tau_e = 1.0;
  std::optional<double> t1 = 7.4;  // qubit decay; nullopt disables the channel
  double kappa = 0.0;              // cavity decay rate
  double dt = 0.01;
  InitialQubit initial = InitialQubit::excited;
};

struct TtmRun {
  double dt_map = 0.2;
  std::size_t depth = 40;
  nonmarkov::MapSpace space = nonmarkov::MapSpace::qubit;
};

struct NetworkRun {
  double j_exchange = 1.0;
  std::array<double, 2> drive{0.0, 0.0};
  double tau_e = 1.0;
  std::optional<double> t1 = 7.4;
  double dephasing = 0.0;  // rate of each qubit's sigma_z channel
  double dt = 0.01;
  double tau_step = 0.05;
  std::size_t tau_count = 41;
};

/// Optional closed loop: the class of a window's packet rescales theta_max
/// for the next window.
struct FeedbackPolicy {
  bool enabled = false;
  std::size_t windows = 1;
  double enhanced_scale = 1.25;
  double elevated_reset = 3.141592653589793;
};

struct IoConfig {
  std::string out_dir = "out";
  std::size_t record_stride = 10;
};

struct RunConfig {
  spiking::NeuronCircuitParams circuit{};
  SpikingRun spiking{};
  QuantumRun quantum{};
  TtmRun ttm{};
  std::string blp_pairs = "default";
  NetworkRun network{};
  entangled::MixtureWeights mixture{};
  decision::ClassificationThresholds thresholds =
      decision::ClassificationThresholds::table_defaults();
  SpikeToThetaMap mapping{};
  FeedbackPolicy feedback{};
  IoConfig io{};
  std::uint64_t seed = 0;

  /// Canonical JSON of every field (no scenario sections).
  std::string to_json() const;
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Thrown for every config problem; `kind` tells the failure classes apart and
/// `field` names the offending key path (empty for whole-file problems).
class ConfigError : public Error {
 public:
  enum class Kind { missing_file, syntax, unknown_key, type, invariant, scenario };

  ConfigError(Kind kind, std::string field, const std::string& what)
      : Error(Errc::config, what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// Parses a config file. When `scenario` is given, the matching section of
/// "scenarios" is merged over the base config before decoding.
RunConfig parse_config(const std::filesystem::path& path,
                       const std::optional<std::string>& scenario = std::nullopt);
RunConfig parse_config_text(const std::string& text,
                            const std::optional<std::string>& scenario = std::nullopt);

/// Scenario names present in a config file, sorted by name.
std::vector<std::string> scenario_names(const std::filesystem::path& path);

std::size_t edit_distance(const std::string& a, const std::string& b);

/// 64-bit FNV-1a hash, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

const char* to_string(ThetaMode m);

}  // namespace qsnn::config

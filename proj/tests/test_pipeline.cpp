#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qsnn/pipeline.hpp"

using namespace qsnn;
using namespace qsnn::pipeline;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kConfigs = fs::path(QSNN_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qsnn_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

config::RunConfig short_reference() {
  auto cfg = config::parse_config(kConfigs / "reference.json", std::string("a"));
  cfg.spiking.t_end = 10.0;
  return cfg;
}

const std::vector<spiking::Spike> kFourSpikes{{1.0, 0.5}, {2.0, 1.0}, {4.0, 0.25}, {7.0, 0.75}};

}  // namespace

TEST(SpikeToTheta, IndexModeRampsToThetaMax) {
  const auto s = spike_to_theta(kFourSpikes, {config::ThetaMode::index, kPi}, 10.0);
  ASSERT_EQ(s.size(), 4u);
  const double expected[] = {kPi / 4, kPi / 2, 3 * kPi / 4, kPi};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(s.entries[k].theta, expected[k]);
  EXPECT_EQ(s.entries[0].t_start, 1.0);
  EXPECT_EQ(s.entries[0].t_end, 2.0);
  EXPECT_EQ(s.entries[3].t_end, 10.0);
}

TEST(SpikeToTheta, AmplitudeAndConstantModes) {
  const auto a = spike_to_theta(kFourSpikes, {config::ThetaMode::amplitude, 2.0}, 10.0);
  EXPECT_DOUBLE_EQ(a.entries[0].theta, 1.0);
  EXPECT_DOUBLE_EQ(a.entries[1].theta, 2.0);
  EXPECT_DOUBLE_EQ(a.entries[2].theta, 0.5);
  const auto c = spike_to_theta(kFourSpikes, {config::ThetaMode::constant, 1.5}, 10.0);
  for (const auto& e : c.entries) EXPECT_EQ(e.theta, 1.5);
}

TEST(SpikeToTheta, EdgeCases) {
  EXPECT_EQ(spike_to_theta({}, {}, 10.0).size(), 0u);
  // A final spike at the window end has no room for an entry.
  const std::vector<spiking::Spike> late{{1.0, 1.0}, {10.0, 1.0}};
  EXPECT_EQ(spike_to_theta(late, {}, 10.0).size(), 1u);
  const std::vector<spiking::Spike> unsorted{{2.0, 1.0}, {1.0, 1.0}};
  EXPECT_THROW(spike_to_theta(unsorted, {}, 10.0), Error);
  EXPECT_THROW(spike_to_theta(kFourSpikes, {config::ThetaMode::index, 7.0}, 10.0), Error);
}

TEST(Feedback, ClassDrivesNextThetaMax) {
  config::FeedbackPolicy fb;
  EXPECT_DOUBLE_EQ(feedback_theta_max(fb, decision::AwarenessClass::Regular, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(feedback_theta_max(fb, decision::AwarenessClass::EnhancedAwareness, 2.0), 2.5);
  EXPECT_DOUBLE_EQ(feedback_theta_max(fb, decision::AwarenessClass::EnhancedAwareness, 6.0),
                   std::fmod(7.5, 2 * kPi));
  EXPECT_DOUBLE_EQ(feedback_theta_max(fb, decision::AwarenessClass::Elevated, 2.0), kPi);
}

TEST(Stages, SpikeListRoundTripGivesIdenticalSchedule) {
  const auto cfg = short_reference();
  const auto dir = scratch("roundtrip");
  RunWriter w(dir);
  const auto sp = run_spike_stage(cfg);
  write_spike_artifacts(w, sp);
  const auto reread = read_spike_list(dir / "spikes.csv", 1);
  ASSERT_EQ(reread, sp.neuron1.spikes);
  const auto a = spike_to_theta(sp.neuron1.spikes, cfg.mapping, cfg.spiking.t_end);
  const auto b = spike_to_theta(reread, cfg.mapping, cfg.spiking.t_end);
  RunWriter wa(dir / "a"), wb(dir / "b");
  write_theta_schedule(wa, "theta.csv", a);
  write_theta_schedule(wb, "theta.csv", b);
  EXPECT_EQ(slurp(dir / "a/theta.csv"), slurp(dir / "b/theta.csv"));
  EXPECT_EQ(wa.files()[0].fnv1a, wb.files()[0].fnv1a);
  fs::remove_all(dir);
}

TEST(Pipeline, DeterministicArtifacts) {
  const auto cfg = short_reference();
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const auto m1 = run_pipeline(cfg, d1);
  const auto m2 = run_pipeline(cfg, d2);
  ASSERT_TRUE(m1.ok) << m1.error;
  ASSERT_TRUE(m2.ok) << m2.error;
  ASSERT_EQ(m1.files.size(), m2.files.size());
  for (std::size_t i = 0; i < m1.files.size(); ++i) {
    EXPECT_EQ(m1.files[i].path, m2.files[i].path);
    EXPECT_EQ(m1.files[i].fnv1a, m2.files[i].fnv1a) << m1.files[i].path;
  }
  EXPECT_EQ(m1.config_hash, m2.config_hash);
  EXPECT_TRUE(fs::exists(d1 / "manifest.json"));
  EXPECT_TRUE(fs::exists(d1 / "packets.ndjson"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Pipeline, DegenerateRunEmitsNoPackets) {
  const auto cfg = config::parse_config(kConfigs / "degenerate.json");
  const auto dir = scratch("degenerate");
  const auto m = run_pipeline(cfg, dir);
  ASSERT_TRUE(m.ok) << m.error;
  ASSERT_EQ(m.windows.size(), 1u);
  EXPECT_EQ(m.windows[0].q, 0u);
  EXPECT_EQ(m.windows[0].level, 0.0);
  EXPECT_EQ(m.windows[0].cls, decision::AwarenessClass::Unclassified);
  EXPECT_EQ(m.packets, 0u);
  EXPECT_EQ(slurp(dir / "packets.ndjson"), "");
  fs::remove_all(dir);
}

TEST(Pipeline, FailureIsRecordedInManifest) {
  auto cfg = short_reference();
  cfg.circuit.k1_coupled = 1e6;
  cfg.circuit.k2_coupled = 1e6;
  const auto dir = scratch("failed");
  const auto m = run_pipeline(cfg, dir);
  EXPECT_FALSE(m.ok);
  EXPECT_EQ(m.failed_stage, "spike");
  EXPECT_FALSE(m.error.empty());
  const auto manifest = slurp(dir / "manifest.json");
  EXPECT_NE(manifest.find("\"failed_stage\": \"spike\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(OutputDir, FlagBeatsEnvironmentBeatsConfig) {
  config::RunConfig cfg;
  cfg.io.out_dir = "from_config";
  ::unsetenv("QSNN_OUT");
  EXPECT_EQ(resolve_out_dir(std::nullopt, cfg), fs::path("from_config"));
  ::setenv("QSNN_OUT", "from_env", 1);
  EXPECT_EQ(resolve_out_dir(std::nullopt, cfg), fs::path("from_env"));
  EXPECT_EQ(resolve_out_dir(std::string("from_flag"), cfg), fs::path("from_flag"));
  ::unsetenv("QSNN_OUT");
}

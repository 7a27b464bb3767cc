#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qsnn/config.hpp"

using namespace qsnn;
using namespace qsnn::config;

namespace {

const std::filesystem::path kReference = std::filesystem::path(QSNN_SOURCE_DIR) / "configs/reference.json";

ConfigError error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a config error for " << text;
  return ConfigError(ConfigError::Kind::syntax, "", "");
}

}  // namespace

TEST(Config, EmptyObjectYieldsDefaults) {
  const auto c = parse_config_text("{}");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.quantum.fock.n_max, 4);
  EXPECT_EQ(c.ttm.depth, 40u);
  EXPECT_FALSE(c.feedback.enabled);
}

TEST(Config, UnknownKeySuggestsNearestName) {
  const auto e = error_of(R"({"quantum": {"focks_max": 4, "n_max": 4}})");
  EXPECT_EQ(e.kind(), ConfigError::Kind::unknown_key);
  EXPECT_EQ(e.field(), "quantum.focks_max");
  EXPECT_NE(std::string(e.what()).find("unknown key 'quantum.focks_max'"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("did you mean"), std::string::npos);

  const auto top = error_of(R"({"circut": {}})");
  EXPECT_NE(std::string(top.what()).find("did you mean 'circuit'"), std::string::npos);
}

TEST(Config, InvariantNamesTheField) {
  const auto e = error_of(R"({"circuit": {"c1": 0}})");
  EXPECT_EQ(e.kind(), ConfigError::Kind::invariant);
  EXPECT_EQ(e.field(), "circuit.c1");
  EXPECT_NE(std::string(e.what()).find("circuit.c1 must be > 0"), std::string::npos);

  EXPECT_EQ(error_of(R"({"quantum": {"dt": 0.03}})").field(), "quantum.dt");
  EXPECT_EQ(error_of(R"({"mapping": {"theta_max": 7.0}})").field(), "mapping.theta_max");
  EXPECT_EQ(error_of(R"({"mixture": {"weights": [0.5, 0.5, 0.5]}})").field(), "mixture.weights");
}

TEST(Config, FailureKindsAreDistinct) {
  try {
    parse_config("/nonexistent/qsnn.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::missing_file);
  }
  EXPECT_EQ(error_of("{ \"circuit\": ").kind(), ConfigError::Kind::syntax);
  EXPECT_EQ(error_of(R"({"circuit": {"c1": "big"}})").kind(), ConfigError::Kind::type);
  EXPECT_EQ(error_of(R"({"circuit": {"c1": -1}})").kind(), ConfigError::Kind::invariant);
  try {
    parse_config(kReference, std::string("zz"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::scenario);
  }
}

TEST(Config, EchoRoundTrips) {
  for (const std::string s : {"a", "b", "c"}) {
    const auto c = parse_config(kReference, s);
    const auto echoed = parse_config_text(c.to_json());
    EXPECT_EQ(echoed, c) << "scenario " << s;
    EXPECT_EQ(echoed.to_json(), c.to_json());
  }
}

TEST(Config, ScenarioPatchesMergeOverBase) {
  const auto base = parse_config(kReference);
  const auto c = parse_config(kReference, std::string("c"));
  EXPECT_EQ(base.circuit.k1_coupled, 220.0);
  EXPECT_EQ(c.circuit.k1_coupled, 267.5);
  EXPECT_EQ(c.quantum.kappa, 1.0);
  EXPECT_EQ(c.thresholds.bands[2].q_high, 24.0);
  // Untouched keys keep their base values.
  EXPECT_EQ(c.circuit.k2_coupled, base.circuit.k2_coupled);
  EXPECT_EQ(c.network.dephasing, 0.02);
  EXPECT_EQ(scenario_names(kReference), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Config, NullDisablesDecay) {
  const auto c = parse_config_text(R"({"quantum": {"t1": null}, "network": {"t1": null}})");
  EXPECT_FALSE(c.quantum.t1.has_value());
  EXPECT_FALSE(c.network.t1.has_value());
}

TEST(Config, HashIsStable) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex(parse_config(kReference).to_json()),
            fnv1a_hex(parse_config(kReference).to_json()));
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
}

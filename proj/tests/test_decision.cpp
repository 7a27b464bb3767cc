#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qsnn/decision.hpp"
#include "qsnn/error.hpp"

using namespace qsnn;
using namespace qsnn::decision;

namespace {

const ClassificationThresholds kTable = ClassificationThresholds::table_defaults();

}  // namespace

TEST(Classify, TableRowsWithActions) {
  auto c = classify(5, 1.5, 0.9, kTable);
  EXPECT_EQ(c.cls, AwarenessClass::Regular);
  EXPECT_EQ(c.directive, "continue generation");
  c = classify(17, 0.3, 0.7, kTable);
  EXPECT_EQ(c.cls, AwarenessClass::EnhancedAwareness);
  EXPECT_EQ(c.directive, "probe & read-out");
}

TEST(Classify, BoundsAreStrict) {
  EXPECT_EQ(classify(3, 5.0, 0.99, kTable).cls, AwarenessClass::Unclassified);
  EXPECT_EQ(classify(8, 5.0, 0.99, kTable).cls, AwarenessClass::Unclassified);
  EXPECT_EQ(classify(5, 1.23, 0.99, kTable).cls, AwarenessClass::Unclassified);
  EXPECT_EQ(classify(5, 5.0, 0.85, kTable).cls, AwarenessClass::Unclassified);
  EXPECT_EQ(classify(4, 1.2300001, 0.8500001, kTable).cls, AwarenessClass::Regular);
}

TEST(Classify, GapsHoldWithoutClass) {
  for (std::uint32_t q : {0u, 10u, 21u, 23u, 40u}) {
    const auto c = classify(q, 100.0, 0.99, kTable);
    EXPECT_EQ(c.cls, AwarenessClass::Unclassified) << "q = " << q;
    EXPECT_EQ(c.directive, kHoldDirective);
  }
}

TEST(Classify, WidenedElevatedBandAcceptsQ23) {
  auto th = kTable;
  th.bands[2].q_high = 24.0;
  const auto c = classify(23, 0.1, 0.6, th);
  EXPECT_EQ(c.cls, AwarenessClass::Elevated);
  EXPECT_EQ(c.directive, "full route & reset");
}

TEST(Classify, RejectsOutOfRangeInputs) {
  EXPECT_THROW(classify(5, std::nan(""), 0.5, kTable), Error);
  EXPECT_THROW(classify(5, 1.0, 1.5, kTable), Error);
}

TEST(Classify, RandomThresholdSetsAgreeWithDirectRule) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    ClassificationThresholds th = kTable;
    double lo = 0.0;
    for (auto& b : th.bands) {
      b.q_low = lo + std::floor(u(rng) * 4.0);
      b.q_high = b.q_low + 1.0 + std::floor(u(rng) * 6.0);
      b.level_min = 0.01 + 2.0 * u(rng);
      b.corr_min = 0.05 + 0.9 * u(rng);
      lo = b.q_high;
    }
    ASSERT_NO_THROW(th.validate());
    const auto q = static_cast<std::uint32_t>(u(rng) * 40.0);
    const double level = 2.5 * u(rng);
    const double corr = u(rng);
    AwarenessClass expected = AwarenessClass::Unclassified;
    for (const auto& b : th.bands) {
      if (q > b.q_low && q < b.q_high && level > b.level_min && corr > b.corr_min) {
        expected = b.cls;
      }
    }
    ASSERT_EQ(classify(q, level, corr, th).cls, expected) << "trial " << trial;
  }
}

TEST(Thresholds, ValidationRejectsOverlapAndBadRanges) {
  auto th = kTable;
  th.bands[1].q_low = 6.0;
  EXPECT_THROW(th.validate(), Error);
  th = kTable;
  th.bands[0].corr_min = 1.0;
  EXPECT_THROW(th.validate(), Error);
  th = kTable;
  th.bands[2].level_min = 0.0;
  EXPECT_THROW(th.validate(), Error);
  EXPECT_NO_THROW(kTable.validate());
}

TEST(Packet, JsonRoundTripAndFieldOrder) {
  InformationPacket p;
  p.id = 7;
  p.t_emit = 41.25;
  p.cls = AwarenessClass::EnhancedAwareness;
  p.level = 0.1 + 0.2;
  p.correlation = 2.0 / 3.0;
  p.q = 15;
  p.bloch = {0.1, -0.2, 0.3};
  p.theta = {0.5, 1.0 / 7.0};
  p.directive = "probe & read-out";
  const auto s = to_json(p);
  EXPECT_EQ(packet_from_json(s), p);
  EXPECT_LT(s.find("\"id\""), s.find("\"t_emit\""));
  EXPECT_LT(s.find("\"theta\""), s.find("\"directive\""));
  EXPECT_THROW(packet_from_json("{\"id\": 1}"), Error);
}

TEST(Emitter, IdsIncreaseOnlyForClassifiedContexts) {
  std::ostringstream sink;
  PacketEmitter em(&sink, 10);
  RunContext good{1.0, 5, 2.0, 0.9, {0, 0, 1}, {1.0}};
  RunContext gap = good;
  gap.q = 10;
  EXPECT_EQ(em.generate_packet(good, kTable)->id, 10u);
  EXPECT_FALSE(em.generate_packet(gap, kTable).has_value());
  EXPECT_EQ(em.next_id(), 11u);
  EXPECT_EQ(em.generate_packet(good, kTable)->id, 11u);
  std::istringstream lines(sink.str());
  std::string line;
  std::uint64_t expected = 10;
  while (std::getline(lines, line)) EXPECT_EQ(packet_from_json(line).id, expected++);
  EXPECT_EQ(expected, 12u);
}

#include "qsnn/decision.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"
#include "qsnn/error.hpp"

namespace qsnn::decision {

std::string_view to_string(AwarenessClass c) {
  switch (c) {
    case AwarenessClass::Regular: return "Regular";
    case AwarenessClass::EnhancedAwareness: return "EnhancedAwareness";
    case AwarenessClass::Elevated: return "Elevated";
    case AwarenessClass::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

AwarenessClass awareness_from_string(std::string_view s) {
  if (s == "Regular") return AwarenessClass::Regular;
  if (s == "EnhancedAwareness") return AwarenessClass::EnhancedAwareness;
  if (s == "Elevated") return AwarenessClass::Elevated;
  if (s == "Unclassified") return AwarenessClass::Unclassified;
  throw Error(Errc::invalid_argument, "unknown awareness class '" + std::string(s) + "'");
}

ClassificationThresholds ClassificationThresholds::table_defaults() {
  return {{{
      {3.0, 8.0, 1.23, 0.85, AwarenessClass::Regular, "continue generation"},
      {14.0, 20.0, 0.21, 0.65, AwarenessClass::EnhancedAwareness, "probe & read-out"},
      {22.0, 23.0, 0.052, 0.55, AwarenessClass::Elevated, "full route & reset"},
  }}};
}

void ClassificationThresholds::validate() const {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const std::string at = "thresholds.bands[" + std::to_string(i) + "]";
    if (!(std::isfinite(b.q_low) && std::isfinite(b.q_high) && b.q_low < b.q_high)) {
      throw Error(Errc::config, at + ".q_range must satisfy q_low < q_high");
    }
    if (!(std::isfinite(b.level_min) && b.level_min > 0.0)) {
      throw Error(Errc::config, at + ".level_min must be > 0");
    }
    if (!(b.corr_min > 0.0 && b.corr_min < 1.0)) {
      throw Error(Errc::config, at + ".corr_min must be in (0, 1)");
    }
    if (b.cls == AwarenessClass::Unclassified) {
      throw Error(Errc::config, at + ".class must not be Unclassified");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = bands[j];
      if (!(b.q_high <= o.q_low || o.q_high <= b.q_low)) {
        throw Error(Errc::config, at + ".q_range overlaps band " + std::to_string(j));
      }
    }
  }
}

Classification classify(std::uint32_t q, double level, double correlation,
                        const ClassificationThresholds& th) {
  if (!std::isfinite(level) || !(correlation >= 0.0 && correlation <= 1.0)) {
    throw Error(Errc::invalid_argument,
                "classify: level must be finite and correlation in [0, 1]");
  }
  const double qd = static_cast<double>(q);
  for (const auto& band : th.bands) {
    if (qd > band.q_low && qd < band.q_high) {
      if (level > band.level_min && correlation > band.corr_min) {
        return {band.cls, band.action};
      }
      break;
    }
  }
  return {};
}

std::string to_json(const InformationPacket& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["t_emit"] = p.t_emit;
  j["class"] = to_string(p.cls);
  j["level"] = p.level;
  j["correlation"] = p.correlation;
  j["q"] = p.q;
  j["bloch"] = p.bloch;
  j["theta"] = p.theta;
  j["directive"] = p.directive;
  return j.dump();
}

InformationPacket packet_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    InformationPacket p;
    p.id = j.at("id").get<std::uint64_t>();
    p.t_emit = j.at("t_emit").get<double>();
    p.cls = awareness_from_string(j.at("class").get<std::string>());
    p.level = j.at("level").get<double>();
    p.correlation = j.at("correlation").get<double>();
    p.q = j.at("q").get<std::uint32_t>();
    p.bloch = j.at("bloch").get<std::array<double, 3>>();
    p.theta = j.at("theta").get<std::vector<double>>();
    p.directive = j.at("directive").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, std::string("malformed packet JSON: ") + e.what());
  }
}

std::optional<InformationPacket> PacketEmitter::generate_packet(
    const RunContext& ctx, const ClassificationThresholds& th) {
  const Classification c = classify(ctx.q, ctx.level, ctx.correlation, th);
  if (c.cls == AwarenessClass::Unclassified) return std::nullopt;

  InformationPacket p;
  p.id = next_id_;
  p.t_emit = ctx.t_emit;
  p.cls = c.cls;
  p.level = ctx.level;
  p.correlation = ctx.correlation;
  p.q = ctx.q;
  p.bloch = ctx.bloch;
  p.theta = ctx.theta;
  p.directive = c.directive;

  if (sink_ != nullptr) {
    *sink_ << to_json(p) << '\n';
    if (!*sink_) throw Error(Errc::io, "packet sink write failed");
  }
  ++next_id_;
  return p;
}

}  // namespace qsnn::decision

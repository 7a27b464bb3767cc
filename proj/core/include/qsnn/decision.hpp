#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qsnn::decision {

enum class AwarenessClass { Regular, EnhancedAwareness, Elevated, Unclassified };

std::string_view to_string(AwarenessClass c);
AwarenessClass awareness_from_string(std::string_view s);

/// One row of the classification table. The spike-count range is open:
/// q_low < q < q_high. Level and correlation comparisons are strict.
struct Band {
  double q_low;
  double q_high;
  double level_min;
  double corr_min;
  AwarenessClass cls;
  std::string action;
};

struct ClassificationThresholds {
  std::array<Band, 3> bands;

  /// Regular (3 < q < 8, level > 1.23, corr > 0.85), EnhancedAwareness
  /// (14 < q < 20, level > 0.21, corr > 0.65), Elevated (22 < q < 23,
  /// level > 0.052, corr > 0.55).
  static ClassificationThresholds table_defaults();

  void validate() const;
};

inline constexpr std::string_view kHoldDirective = "hold";

struct Classification {
  AwarenessClass cls = AwarenessClass::Unclassified;
  std::string directive{kHoldDirective};
};

Classification classify(std::uint32_t q, double level, double correlation,
                        const ClassificationThresholds& th);

struct InformationPacket {
  std::uint64_t id = 0;
  double t_emit = 0.0;
  AwarenessClass cls = AwarenessClass::Unclassified;
  double level = 0.0;
  double correlation = 0.0;
  std::uint32_t q = 0;
  std::array<double, 3> bloch{0.0, 0.0, 0.0};
  std::vector<double> theta;
  std::string directive;

  friend bool operator==(const InformationPacket&, const InformationPacket&) = default;
};

/// One line of newline-delimited JSON with the stable field order
/// id, t_emit, class, level, correlation, q, bloch, theta, directive.
std::string to_json(const InformationPacket& p);
InformationPacket packet_from_json(std::string_view text);

/// Everything the pipeline has measured when a packet decision is due.
struct RunContext {
  double t_emit = 0.0;
  std::uint32_t q = 0;
  double level = 0.0;
  double correlation = 0.0;
  std::array<double, 3> bloch{0.0, 0.0, 0.0};
  std::vector<double> theta;
};

/// Single writer that assigns monotonically increasing ids.
class PacketEmitter {
 public:
  explicit PacketEmitter(std::ostream* sink = nullptr, std::uint64_t first_id = 0)
      : sink_(sink), next_id_(first_id) {}

  /// Emits a packet iff the context classifies; the counter is unchanged otherwise.
  std::optional<InformationPacket> generate_packet(const RunContext& ctx,
                                                   const ClassificationThresholds& th);

  std::uint64_t next_id() const { return next_id_; }

 private:
  std::ostream* sink_;
  std::uint64_t next_id_;
};

}  // namespace qsnn::decision

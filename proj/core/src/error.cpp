#include "qsnn/error.hpp"

namespace qsnn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::integration_fault: return "integration-fault";
    case Errc::singular_coefficient: return "singular-coefficient";
    case Errc::empty_input: return "empty-input";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::shape: return "shape";
    case Errc::step_size: return "step-size";
    case Errc::insufficient_history: return "insufficient-history";
    case Errc::config: return "config";
    case Errc::no_decay: return "no-decay";
    case Errc::insufficient_peaks: return "insufficient-peaks";
    case Errc::undefined_correlation: return "undefined-correlation";
    case Errc::sampling: return "sampling";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace qsnn

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsnn {

enum class Errc {
  invalid_argument,
  integration_fault,
  singular_coefficient,
  empty_input,
  insufficient_data,
  shape,
  step_size,
  insufficient_history,
  config,
  no_decay,
  insufficient_peaks,
  undefined_correlation,
  sampling,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Non-finite state encountered while integrating; carries the simulation time.
class IntegrationFault : public Error {
 public:
  IntegrationFault(double t, const std::string& what)
      : Error(Errc::integration_fault, what), time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace qsnn

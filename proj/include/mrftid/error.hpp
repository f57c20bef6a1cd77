#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrftid {

/// Error classes raised by the library. Each maps to one CLI exit code.
enum class ErrorCode {
  InvalidParameter,
  InvalidFrequency,
  DegenerateDrag,
  Diverged,
  NotConverged,
  NoOscillation,
  FormatError,
  SamplingError,
  SeriesNotConverged,
  NoLimitCycle,
  CellSolveFailed,
  OutOfGridRange,
  UnsupportedVersion,
  CorruptManifold,
  StaleManifold,
  NoIntersection,
  NoFeasibleEstimate,
  NoAmplitudeMatch,
  UnreliableStatistics,
  NoStepDetected,
  IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Process exit code for an error class (0 and 2 are reserved for success and usage errors).
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrftid

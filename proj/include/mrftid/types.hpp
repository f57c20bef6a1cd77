#pragma once

#include <cmath>

#include "mrftid/error.hpp"

namespace mrftid {

/// MRFT tuning: switching phase parameter beta and relay amplitude h.
struct MrftConfig {
  double beta = 0.0;
  double h = 1.0;

  void validate() const {
    if (!std::isfinite(beta) || !(beta > -1.0 && beta < 1.0)) {
      throw Error(ErrorCode::InvalidParameter, "beta must lie in (-1, 1)");
    }
    if (!std::isfinite(h) || !(h > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "relay amplitude h must be positive");
    }
  }
};

/// Steady oscillation of the relay loop, predicted or measured.
struct LimitCycle {
  double frequency_hz = 0.0;
  double amplitude = 0.0;
  /// (max - min) / mean of the trailing periods; zero for predictions.
  double period_spread = 0.0;
  /// Number of periods judged steady; zero for predictions.
  int steady_cycles = 0;
  /// Normalized switching-condition residual at the returned frequency; zero for measurements.
  double residual = 0.0;
};

}  // namespace mrftid

#pragma once

#include "mrftid/plant.hpp"
#include "mrftid/signal_log.hpp"
#include "mrftid/types.hpp"

namespace mrftid {

/// Relay memory: last output and the error peaks since the last switch.
struct MrftState {
  double u = 1.0;
  double e_max = 0.0;
  double e_min = 0.0;
  /// False right after a switch while the new state's own switching condition still holds;
  /// set once that condition has been false. Prevents an immediate switch back for beta < 0.
  bool armed = true;
};

/// u = +h, zero peak trackers. With zero thresholds the relay behaves as an ideal relay
/// until the first peaks are recorded.
MrftState initial_state(const MrftConfig& cfg);

struct MrftStep {
  double u;
  bool switched;
  /// Threshold that was crossed; meaningful when switched.
  double threshold;
  MrftState state;
};

/**
 * One relay evaluation. Thresholds b1 = -beta e_min, b2 = beta e_max.
 * From +h the output switches to -h when e <= -b2, from -h to +h when e >= b1.
 * A zero threshold needs a strict crossing, so beta = 0 gives h sign(e) with hold at e = 0.
 */
MrftStep mrft_update(const MrftState& state, const MrftConfig& cfg, double e);

struct SimOptions {
  /// |y| above this raises Diverged.
  double divergence_bound = 1e9;
  /// Keep the plant output column in the log.
  bool record_output = true;
};

/// min(smallest lag, delay) / 50 with a 1e-5 s floor; zero entries are skipped.
double default_dt(const Plant& plant);

/// Duration covering roughly `periods` oscillation periods of the describing-function estimate.
double suggested_duration(const Plant& plant, const MrftConfig& cfg, double periods = 40.0);

/**
 * Closed loop plant + MRFT with reference 0 and e = -y. Fixed-step RK4 on the canonical
 * state-space realization. The relay is evaluated at the samples; a switch is placed inside
 * the step by linear interpolation of e across the threshold and reaches the plant input
 * exactly tau later, where the integration step is split.
 */
SignalLog simulate_mrft(const Plant& plant, const MrftConfig& cfg, double dt, double duration,
                        const MrftState& init, const SimOptions& options = {});

SignalLog simulate_mrft(const Plant& plant, const MrftConfig& cfg, double dt, double duration);

struct DetectOptions {
  int trailing_periods = 5;
  double max_spread = 0.005;
  int min_switches = 12;
  double discard_fraction = 0.5;
  int discard_periods = 6;
};

/// Frequency and amplitude of the steady oscillation at the end of the log.
/// Throws NoOscillation without any relay switch and NotConverged otherwise.
LimitCycle detect_limit_cycle(const SignalLog& log, const MrftConfig& cfg,
                              const DetectOptions& options = {});

}  // namespace mrftid

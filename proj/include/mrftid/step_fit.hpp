#pragma once

#include <iosfwd>
#include <vector>

namespace mrftid {

/// Force (or thrust) record of a propulsion step test; the command steps at t = 0.
struct StepLog {
  std::vector<double> t;
  std::vector<double> f;
};

/// CSV with header `t,f`; '#' lines are comments.
StepLog ingest_step_log(std::istream& in);
void write_step_log(std::ostream& out, const StepLog& log);

/// k (1 - exp(-(t - tau_p) / T_p)) for t >= tau_p, on top of the pre-step baseline.
struct StepFit {
  double k = 0.0;
  double tp = 0.0;
  double tau_p = 0.0;
  double baseline = 0.0;
  double rms = 0.0;
};

struct StepFitOptions {
  /// Minimum (step size)^2 / noise variance for a step to count as present.
  double min_variance_ratio = 25.0;
  /// Search tau_p over samples in [0, max_delay_fraction * record length].
  double max_delay_fraction = 0.5;
};

/**
 * Least-squares fit: grid search of tau_p over the sample instants, an inner 1-D search over
 * T_p (log scan, then golden section), k in closed form; the best tau_p is then refined
 * continuously between its neighbouring samples. Throws NoStepDetected when the step is
 * not distinguishable from the noise.
 */
StepFit fit_step_response(const StepLog& log, const StepFitOptions& options = {});

}  // namespace mrftid

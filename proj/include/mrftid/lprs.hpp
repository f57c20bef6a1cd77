#pragma once

#include <vector>

#include "mrftid/periodic.hpp"
#include "mrftid/plant.hpp"
#include "mrftid/types.hpp"

namespace mrftid {

struct LprsOptions {
  SeriesMethod method = SeriesMethod::ClosedForm;
  SeriesOptions series{};
  /// Log-spaced scan over [scan_lo, scan_hi] / (sum of time parameters) [rad/s].
  int scan_points = 200;
  double scan_lo = 1e-3;
  double scan_hi = 1e3;
  /// Relative bisection tolerance on omega.
  double rel_tol = 1e-9;
};

/**
 * Exact switching condition of the MRFT loop, normalized by the output amplitude:
 *
 *   g(omega) = (y_s(omega) + beta * a_y(omega)) / a_y(omega),
 *
 * where y_s is the output at the -h to +h switch. In the loop e = -y, and the relay switches
 * up when e rises through -beta * e_min = beta * a_y, so a cycle at omega requires g = 0.
 */
double switching_residual(const Plant& plant, double beta, double omega,
                          const LprsOptions& options = {});

/// Every limit cycle found in the scan range; the principal one (nearest to the describing
/// function estimate) comes first. Throws NoLimitCycle when there is none.
std::vector<LimitCycle> solve_limit_cycles(const Plant& plant, const MrftConfig& cfg,
                                           const LprsOptions& options = {});

/// Principal exact limit cycle.
LimitCycle solve_limit_cycle(const Plant& plant, const MrftConfig& cfg,
                             const LprsOptions& options = {});

/// First-harmonic prediction: arg W(j omega) = -pi + asin(beta), a = 4 h |W| / pi.
LimitCycle df_predict(const Plant& plant, const MrftConfig& cfg, const LprsOptions& options = {});

}  // namespace mrftid

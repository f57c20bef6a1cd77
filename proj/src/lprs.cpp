#include "mrftid/lprs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace mrftid {

namespace {

struct Evaluation {
  double g;
  double a_y;
  double slope_at_switch;
};

Evaluation evaluate(const Plant& plant, double beta, double omega, const LprsOptions& options) {
  const PeriodicResponse response(plant, 1.0, omega, options.method, options.series);
  const double y_s = response.at_switch();
  const double a_y = std::max(response.amplitude(), std::abs(y_s));
  return {(y_s + beta * a_y) / a_y, a_y, response.derivative(0.0)};
}

std::vector<double> scan_grid(const Plant& plant, const LprsOptions& options) {
  const double sum = plant.time_scale_sum();
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::NoLimitCycle, "plant has no time parameters to set a frequency scale");
  }
  if (options.scan_points < 2 || !(options.scan_lo > 0.0) || !(options.scan_hi > options.scan_lo)) {
    throw Error(ErrorCode::InvalidParameter, "invalid frequency scan settings");
  }
  const double lo = std::log(options.scan_lo / sum);
  const double hi = std::log(options.scan_hi / sum);
  std::vector<double> grid(static_cast<std::size_t>(options.scan_points));
  for (int i = 0; i < options.scan_points; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (options.scan_points - 1));
  }
  return grid;
}

// Bisection in log(omega) for a sign change of f between lo and hi.
template <typename F>
double bisect(F&& f, double lo, double hi, double f_lo, double rel_tol) {
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * lo; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

std::optional<double> df_frequency(const Plant& plant, double beta, const LprsOptions& options) {
  const double target = -std::numbers::pi + std::asin(beta);
  auto f = [&](double w) { return phase(plant, w) - target; };
  const auto grid = scan_grid(plant, options);
  double prev = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    if (prev == 0.0) return grid[i - 1];
    if ((prev < 0.0) != (cur < 0.0)) return bisect(f, grid[i - 1], grid[i], prev, options.rel_tol);
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace

double switching_residual(const Plant& plant, double beta, double omega,
                          const LprsOptions& options) {
  return evaluate(plant, beta, omega, options).g;
}

std::vector<LimitCycle> solve_limit_cycles(const Plant& plant, const MrftConfig& cfg,
                                           const LprsOptions& options) {
  cfg.validate();
  const auto grid = scan_grid(plant, options);
  auto g = [&](double w) { return evaluate(plant, cfg.beta, w, options).g; };

  std::vector<double> roots;
  double prev = g(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = g(grid[i]);
    if (cur == 0.0) {
      roots.push_back(grid[i]);
    } else if (prev != 0.0 && (prev < 0.0) != (cur < 0.0)) {
      roots.push_back(bisect(g, grid[i - 1], grid[i], prev, options.rel_tol));
    }
    prev = cur;
  }

  std::vector<LimitCycle> cycles;
  for (double w : roots) {
    const Evaluation ev = evaluate(plant, cfg.beta, w, options);
    // The relay switches up while e = -y rises, so y must be falling at the switch.
    if (!(ev.slope_at_switch < 0.0)) continue;
    LimitCycle lc;
    lc.frequency_hz = rad_to_hz(w);
    lc.amplitude = cfg.h * ev.a_y;
    lc.residual = std::abs(ev.g);
    cycles.push_back(lc);
  }
  if (cycles.empty()) {
    throw Error(ErrorCode::NoLimitCycle, "switching condition has no admissible root in scan range");
  }

  if (cycles.size() > 1) {
    const auto df = df_frequency(plant, cfg.beta, options);
    const double anchor = df ? rad_to_hz(*df) : cycles.front().frequency_hz;
    auto distance = [anchor](const LimitCycle& lc) {
      return std::abs(std::log(lc.frequency_hz / anchor));
    };
    auto principal = std::min_element(cycles.begin(), cycles.end(),
                                      [&](const auto& a, const auto& b) {
                                        return distance(a) < distance(b);
                                      });
    std::rotate(cycles.begin(), principal, principal + 1);
  }
  return cycles;
}

LimitCycle solve_limit_cycle(const Plant& plant, const MrftConfig& cfg,
                             const LprsOptions& options) {
  return solve_limit_cycles(plant, cfg, options).front();
}

LimitCycle df_predict(const Plant& plant, const MrftConfig& cfg, const LprsOptions& options) {
  cfg.validate();
  const auto w = df_frequency(plant, cfg.beta, options);
  if (!w) throw Error(ErrorCode::NoLimitCycle, "plant phase never reaches -pi + asin(beta)");
  LimitCycle lc;
  lc.frequency_hz = rad_to_hz(*w);
  lc.amplitude = 4.0 * cfg.h * magnitude(plant, *w) / std::numbers::pi;
  return lc;
}

}  // namespace mrftid

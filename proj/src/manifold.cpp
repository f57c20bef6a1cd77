#include "mrftid/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mrftid/parallel.hpp"
#include "mrftid/periodic.hpp"

namespace mrftid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> log_axis(double lo, double hi, int count) {
  std::vector<double> axis(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    axis[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  }
  axis.front() = lo;
  axis.back() = hi;
  return axis;
}

// Bracketing index and log-space weight; a value within rounding of an end is clamped.
struct Bracket {
  std::size_t lo;
  double weight;
};

std::optional<Bracket> bracket(const std::vector<double>& axis, double x) {
  if (axis.size() < 2 || !(x > 0.0)) return std::nullopt;
  const double slack = 1e-12;
  if (x < axis.front() * (1.0 - slack) || x > axis.back() * (1.0 + slack)) return std::nullopt;
  x = std::clamp(x, axis.front(), axis.back());
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  if (hi >= axis.size()) hi = axis.size() - 1;
  const std::size_t lo = hi - 1;
  const double w = std::log(x / axis[lo]) / std::log(axis[hi] / axis[lo]);
  return Bracket{lo, std::clamp(w, 0.0, 1.0)};
}

// (1 - w) a + w b where a zero weight ignores its node, so exact nodes survive next to gaps.
double blend(double a, double b, double w) {
  if (w == 0.0) return a;
  if (w == 1.0) return b;
  return (1.0 - w) * a + w * b;
}

std::string range_text(const std::vector<double>& axis) {
  std::ostringstream s;
  s.precision(6);
  s << '[' << axis.front() << ", " << axis.back() << ']';
  return s.str();
}

double interpolate_table(const Manifold& man, const Eigen::MatrixXd& table, double tp, double td) {
  const auto bp = bracket(man.tp_axis, tp);
  if (!bp) {
    throw Error(ErrorCode::OutOfGridRange, "T_p outside " + range_text(man.tp_axis));
  }
  const auto bd = bracket(man.td_axis, td);
  if (!bd) {
    throw Error(ErrorCode::OutOfGridRange, "T_d outside " + range_text(man.td_axis));
  }
  const auto i = static_cast<Eigen::Index>(bp->lo);
  const auto j = static_cast<Eigen::Index>(bd->lo);
  const double low = blend(table(i, j), table(i, j + 1), bd->weight);
  const double high = blend(table(i + 1, j), table(i + 1, j + 1), bd->weight);
  return blend(low, high, bp->weight);
}

double curve_at(const std::vector<double>& td, const std::vector<double>& values, double x) {
  const auto b = bracket(td, x);
  if (!b) return kNaN;
  return blend(values[b->lo], values[b->lo + 1], b->weight);
}

}  // namespace

void GridSpec::validate() const {
  auto ok = [](double lo, double hi, int n) {
    return std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > lo && n >= 2;
  };
  if (!ok(tp_min, tp_max, tp_count) || !ok(td_min, td_max, td_count)) {
    throw Error(ErrorCode::InvalidParameter, "grid axes must be positive, increasing, >= 2 nodes");
  }
}

std::size_t Manifold::feasible_count() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) n += std::isfinite(tau.data()[i]) ? 1 : 0;
  return n;
}

CellSolution solve_unit_cell(double beta, double tp, double td, const ManifoldTolerances& tol) {
  MrftConfig{beta, 1.0}.validate();
  const double omega = 2.0 * std::numbers::pi;
  const Plant rational = soiptd<double>({1.0, tp, td, 0.0});
  const PeriodicResponse response(rational, 1.0, omega, tol.lprs.method, tol.lprs.series);
  const double a_y = response.amplitude();
  const double target = -beta * a_y;

  // Falling crossings of y_free = target over one period; tau = -s modulo the period.
  const int samples = std::max(16, tol.lprs.series.samples_per_period);
  const double step = 1.0 / samples;
  auto f = [&](double s) { return response.delay_free(s) - target; };
  const double tau_df = (phase(rational, omega) + std::numbers::pi - std::asin(beta)) / omega;

  double best_tau = kNaN;
  double prev = f(0.0);
  for (int k = 1; k <= samples; ++k) {
    const double cur = f(k * step);
    if (prev > 0.0 && cur <= 0.0) {
      double lo = (k - 1) * step;
      double hi = k * step;
      while (hi - lo > tol.tau_tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      const double s = 0.5 * (lo + hi);
      double base = std::fmod(-s, 1.0);
      if (base < 0.0) base += 1.0;
      const double tau = base + std::round(tau_df - base);
      if (std::isnan(best_tau) || std::abs(tau - tau_df) < std::abs(best_tau - tau_df)) {
        best_tau = tau;
      }
    }
    prev = cur;
  }

  CellSolution out;
  if (std::isnan(best_tau) || best_tau < 0.0) return out;
  out.feasible = true;
  out.tau = best_tau;
  out.amplitude = a_y;

  if (tol.verify) {
    std::ostringstream where;
    where.precision(6);
    where << "T_p=" << tp << " T_d=" << td << " tau=" << best_tau;
    LimitCycle lc;
    try {
      lc = solve_limit_cycle(soiptd<double>({1.0, tp, td, best_tau}), {beta, 1.0}, tol.lprs);
    } catch (const Error& e) {
      throw Error(ErrorCode::CellSolveFailed, where.str() + ": " + e.what());
    }
    if (std::abs(lc.frequency_hz - 1.0) > tol.verify_rel) {
      std::ostringstream msg;
      msg.precision(9);
      msg << where.str() << ": principal cycle at " << lc.frequency_hz << " Hz";
      throw Error(ErrorCode::CellSolveFailed, msg.str());
    }
  }
  return out;
}

Manifold generate_ufm(double beta, const GridSpec& grid, const ManifoldTolerances& tol,
                      unsigned threads) {
  MrftConfig{beta, 1.0}.validate();
  grid.validate();
  Manifold man;
  man.beta = beta;
  man.tp_axis = log_axis(grid.tp_min, grid.tp_max, grid.tp_count);
  man.td_axis = log_axis(grid.td_min, grid.td_max, grid.td_count);
  man.tau.setConstant(grid.tp_count, grid.td_count, kNaN);
  man.amp.setConstant(grid.tp_count, grid.td_count, kNaN);
  man.generator.tolerances = tol;

  const auto cells = static_cast<std::size_t>(grid.tp_count) * static_cast<std::size_t>(grid.td_count);
  std::vector<std::string> failures(cells);
  parallel_for(
      cells,
      [&](std::size_t c) {
        const auto i = static_cast<Eigen::Index>(c / static_cast<std::size_t>(grid.td_count));
        const auto j = static_cast<Eigen::Index>(c % static_cast<std::size_t>(grid.td_count));
        try {
          const CellSolution cell = solve_unit_cell(
              beta, man.tp_axis[static_cast<std::size_t>(i)],
              man.td_axis[static_cast<std::size_t>(j)], tol);
          if (cell.feasible) {
            man.tau(i, j) = cell.tau;
            man.amp(i, j) = cell.amplitude;
          }
        } catch (const Error& e) {
          failures[c] = e.what();
        }
      },
      threads);

  for (std::size_t c = 0; c < cells; ++c) {
    if (failures[c].empty()) continue;
    man.generator.failed_cells.push_back(
        {static_cast<int>(c / static_cast<std::size_t>(grid.td_count)),
         static_cast<int>(c % static_cast<std::size_t>(grid.td_count)), failures[c]});
  }
  return man;
}

ScaledManifold scale_manifold(const Manifold& man, double omega_hz) {
  if (!std::isfinite(omega_hz) || !(omega_hz > 0.0)) {
    throw Error(ErrorCode::InvalidFrequency, "measured frequency must be positive");
  }
  const double gamma = man.freq_hz / omega_hz;
  ScaledManifold out;
  out.beta = man.beta;
  out.gamma = gamma;
  out.integrators = man.integrators;
  out.tp_axis = man.tp_axis;
  out.td_axis = man.td_axis;
  for (double& v : out.tp_axis) v *= gamma;
  for (double& v : out.td_axis) v *= gamma;
  out.tau = man.tau * gamma;
  out.amp = man.amp * std::pow(gamma, man.integrators);
  return out;
}

SliceCurve slice_at_tp(const ScaledManifold& man, double tp) {
  const auto b = bracket(man.tp_axis, tp);
  if (!b) {
    throw Error(ErrorCode::OutOfGridRange,
                "T_p outside the scaled grid " + range_text(man.tp_axis));
  }
  SliceCurve curve;
  curve.tp = tp;
  curve.td = man.td_axis;
  curve.tau.resize(man.td_axis.size());
  curve.amp.resize(man.td_axis.size());
  const auto i = static_cast<Eigen::Index>(b->lo);
  for (std::size_t j = 0; j < man.td_axis.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    curve.tau[j] = blend(man.tau(i, c), man.tau(i + 1, c), b->weight);
    curve.amp[j] = blend(man.amp(i, c), man.amp(i + 1, c), b->weight);
  }
  return curve;
}

double SliceCurve::tau_at(double td_value) const { return curve_at(td, tau, td_value); }
double SliceCurve::amp_at(double td_value) const { return curve_at(td, amp, td_value); }

double interpolate_tau(const Manifold& man, double tp, double td) {
  return interpolate_table(man, man.tau, tp, td);
}

double interpolate_amp(const Manifold& man, double tp, double td) {
  return interpolate_table(man, man.amp, tp, td);
}

}  // namespace mrftid

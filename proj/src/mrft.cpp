#include "mrftid/mrft.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "mrftid/lprs.hpp"

namespace mrftid {

namespace {

bool fires_down(double e, double threshold) { return threshold == 0.0 ? e < 0.0 : e <= threshold; }
bool fires_up(double e, double threshold) { return threshold == 0.0 ? e > 0.0 : e >= threshold; }

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// RK4 applied to x' = A x + B u with u constant over the step is the affine map
// x -> Phi x + Gamma u with the fourth-order Taylor polynomials below.
struct Rk4Map {
  Matrix phi;
  Vector gamma;

  Rk4Map(const Matrix& a, const Vector& b, double h) {
    const Eigen::Index n = a.rows();
    const Matrix ha = h * a;
    Matrix term = Matrix::Identity(n, n);
    phi = Matrix::Identity(n, n);
    Matrix psi = Matrix::Identity(n, n);  // sum (hA)^k / (k+1)!
    for (int k = 1; k <= 4; ++k) {
      term = term * ha / static_cast<double>(k);
      phi += term;
      if (k < 4) psi += term / static_cast<double>(k + 1);
    }
    gamma = h * psi * b;
  }

  void apply(Vector& x, double u) const { x = phi * x + gamma * u; }
};

struct Command {
  double time;
  double value;
};

}  // namespace

MrftState initial_state(const MrftConfig& cfg) {
  MrftState s;
  s.u = cfg.h;
  return s;
}

MrftStep mrft_update(const MrftState& state, const MrftConfig& cfg, double e) {
  MrftStep out{state.u, false, 0.0, state};
  MrftState& s = out.state;
  s.e_max = std::max(s.e_max, e);
  s.e_min = std::min(s.e_min, e);

  const bool high = state.u > 0.0;
  const double threshold = high ? -cfg.beta * s.e_max : -cfg.beta * s.e_min;
  const bool fire = high ? fires_down(e, threshold) : fires_up(e, threshold);
  if (!fire) {
    s.armed = true;
    return out;
  }
  if (!s.armed) return out;

  s.u = high ? -cfg.h : cfg.h;
  s.e_max = std::max(0.0, e);
  s.e_min = std::min(0.0, e);
  const bool again = high ? fires_up(e, -cfg.beta * s.e_min) : fires_down(e, -cfg.beta * s.e_max);
  s.armed = !again;
  out.u = s.u;
  out.switched = true;
  out.threshold = threshold;
  return out;
}

double default_dt(const Plant& plant) {
  double smallest = plant.delay() > 0.0 ? plant.delay() : INFINITY;
  for (double tc : plant.denominator_time_constants()) smallest = std::min(smallest, tc);
  if (!std::isfinite(smallest)) return 1e-3;
  return std::max(smallest / 50.0, 1e-5);
}

double suggested_duration(const Plant& plant, const MrftConfig& cfg, double periods) {
  double period = 0.0;
  try {
    period = 1.0 / df_predict(plant, cfg).frequency_hz;
  } catch (const Error&) {
    period = 2.0 * std::numbers::pi * plant.time_scale_sum();
  }
  return periods * period;
}

SignalLog simulate_mrft(const Plant& plant, const MrftConfig& cfg, double dt, double duration,
                        const MrftState& init, const SimOptions& options) {
  cfg.validate();
  if (!std::isfinite(dt) || !(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "dt must be positive");
  if (!std::isfinite(duration) || !(duration > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "duration must be positive");
  }
  const auto ss = realize(plant);
  const Rk4Map full(ss.A, ss.B, dt);
  const double tau = plant.delay();
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));

  SignalLog log;
  log.dt = dt;
  log.t.reserve(steps + 1);
  log.e.reserve(steps + 1);
  log.u.reserve(steps + 1);
  if (options.record_output) log.y.reserve(steps + 1);

  Vector x = Vector::Zero(ss.A.rows());
  MrftState relay = init;
  // The delay line holds zero until the first command arrives.
  double u_plant = 0.0;
  std::deque<Command> pending{{tau, relay.u}};
  double e_prev = 0.0;

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double y = ss.C * x;
    if (!std::isfinite(y) || std::abs(y) > options.divergence_bound) {
      throw Error(ErrorCode::Diverged, "|y| exceeded " + std::to_string(options.divergence_bound) +
                                           " at t = " + std::to_string(t));
    }
    const double e = -y;
    const MrftStep step = mrft_update(relay, cfg, e);
    relay = step.state;
    if (step.switched) {
      double frac = 0.0;
      if (k > 0 && e != e_prev) frac = std::clamp((step.threshold - e_prev) / (e - e_prev), 0.0, 1.0);
      const double t_switch = k > 0 ? t - dt + frac * dt : t;
      pending.push_back({t_switch + tau, step.u});
    }
    e_prev = e;

    log.t.push_back(t);
    log.e.push_back(e);
    log.u.push_back(relay.u);
    if (options.record_output) log.y.push_back(y);
    if (k == steps) break;

    // Advance to t + dt, splitting at command arrivals inside the step.
    const double t_end = t + dt;
    double now = t;
    bool split = false;
    while (!pending.empty() && pending.front().time < t_end) {
      const double at = std::max(pending.front().time, now);
      if (at > now) {
        Rk4Map(ss.A, ss.B, at - now).apply(x, u_plant);
        split = true;
      }
      now = at;
      u_plant = pending.front().value;
      pending.pop_front();
    }
    if (!split && now == t) {
      full.apply(x, u_plant);
    } else if (t_end > now) {
      Rk4Map(ss.A, ss.B, t_end - now).apply(x, u_plant);
    }
  }
  return log;
}

SignalLog simulate_mrft(const Plant& plant, const MrftConfig& cfg, double dt, double duration) {
  return simulate_mrft(plant, cfg, dt, duration, initial_state(cfg));
}

LimitCycle detect_limit_cycle(const SignalLog& log, const MrftConfig& cfg,
                              const DetectOptions& options) {
  cfg.validate();
  const std::size_t n = log.size();
  if (n < 2 || log.e.size() != n || log.u.size() != n) {
    throw Error(ErrorCode::FormatError, "log columns are missing or of unequal length");
  }

  // Replay the peak trackers to recover the threshold at each switch.
  std::vector<double> rising;
  std::vector<std::size_t> rising_index;
  int switches = 0;
  double e_max = std::max(0.0, log.e[0]);
  double e_min = std::min(0.0, log.e[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double e = log.e[k];
    e_max = std::max(e_max, e);
    e_min = std::min(e_min, e);
    if (log.u[k] == log.u[k - 1]) continue;
    ++switches;
    const bool up = log.u[k] > log.u[k - 1];
    const double threshold = up ? -cfg.beta * e_min : -cfg.beta * e_max;
    const double de = e - log.e[k - 1];
    const double frac = de != 0.0 ? std::clamp((threshold - log.e[k - 1]) / de, 0.0, 1.0) : 1.0;
    if (up) {
      rising.push_back(log.t[k - 1] + frac * (log.t[k] - log.t[k - 1]));
      rising_index.push_back(k);
    }
    e_max = std::max(0.0, e);
    e_min = std::min(0.0, e);
  }
  if (switches == 0) throw Error(ErrorCode::NoOscillation, "relay output never switched");
  if (switches < options.min_switches) {
    throw Error(ErrorCode::NotConverged,
                "only " + std::to_string(switches) + " relay switches in the log");
  }

  const double start = log.t.front();
  double discard = start + options.discard_fraction * (log.t.back() - start);
  if (rising.size() > static_cast<std::size_t>(options.discard_periods)) {
    discard = std::max(discard, rising[static_cast<std::size_t>(options.discard_periods)]);
  }
  std::size_t first = 0;
  while (first < rising.size() && rising[first] < discard) ++first;
  const std::size_t m = static_cast<std::size_t>(options.trailing_periods);
  if (rising.size() < first + m + 1) {
    throw Error(ErrorCode::NotConverged, "fewer than " + std::to_string(m) +
                                             " steady periods after the transient");
  }

  const std::size_t last = rising.size() - 1;
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  double amp = 0.0;
  for (std::size_t i = last - m + 1; i <= last; ++i) {
    const double p = rising[i] - rising[i - 1];
    sum += p;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    const auto begin = log.e.begin() + static_cast<std::ptrdiff_t>(rising_index[i - 1]);
    const auto end = log.e.begin() + static_cast<std::ptrdiff_t>(rising_index[i]);
    const auto [mn, mx] = std::minmax_element(begin, end);
    amp += 0.5 * (*mx - *mn);
  }
  const double mean = sum / static_cast<double>(m);
  LimitCycle lc;
  lc.frequency_hz = 1.0 / mean;
  lc.amplitude = amp / static_cast<double>(m);
  lc.period_spread = (hi - lo) / mean;
  lc.steady_cycles = static_cast<int>(m);
  if (!(lc.period_spread < options.max_spread)) {
    throw Error(ErrorCode::NotConverged,
                "period spread " + std::to_string(lc.period_spread) + " above threshold");
  }
  return lc;
}

}  // namespace mrftid

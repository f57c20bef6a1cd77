#include "mrftid/step_fit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mrftid/error.hpp"

namespace mrftid {

namespace {

const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

template <typename F>
double golden_min(F&& f, double lo, double hi, int iterations) {
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 < f2 ? x1 : x2;
}

struct Problem {
  std::vector<double> t;  // post-step instants
  std::vector<double> g;  // baseline-removed samples
  double sum_gg = 0.0;

  // Residual sum of squares with k eliminated; k returned through the pointer.
  double sse(double tau, double tp, double* k = nullptr) const {
    double s_pg = 0.0;
    double s_pp = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < tau) continue;
      const double phi = -std::expm1(-(t[i] - tau) / tp);
      s_pg += phi * g[i];
      s_pp += phi * phi;
    }
    if (s_pp <= 0.0) {
      if (k) *k = 0.0;
      return sum_gg;
    }
    if (k) *k = s_pg / s_pp;
    return sum_gg - s_pg * s_pg / s_pp;
  }
};

struct Inner {
  double tp;
  double sse;
};

Inner best_tp(const Problem& p, double tau, double tp_lo, double tp_hi) {
  constexpr int kScan = 24;
  const double a = std::log(tp_lo);
  const double b = std::log(tp_hi);
  const double step = (b - a) / (kScan - 1);
  int best = 0;
  double best_sse = INFINITY;
  for (int i = 0; i < kScan; ++i) {
    const double v = p.sse(tau, std::exp(a + i * step));
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  const double lo = a + std::max(0, best - 1) * step;
  const double hi = a + std::min(kScan - 1, best + 1) * step;
  const double x = golden_min([&](double lt) { return p.sse(tau, std::exp(lt)); }, lo, hi, 60);
  const double v = p.sse(tau, std::exp(x));
  return v < best_sse ? Inner{std::exp(x), v} : Inner{std::exp(a + best * step), best_sse};
}

double variance(const std::vector<double>& v, std::size_t from, std::size_t to) {
  const double n = static_cast<double>(to - from);
  double mean = 0.0;
  for (std::size_t i = from; i < to; ++i) mean += v[i];
  mean /= n;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += (v[i] - mean) * (v[i] - mean);
  return acc / std::max(1.0, n - 1.0);
}

}  // namespace

StepLog ingest_step_log(std::istream& in) {
  StepLog log;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line.rfind("t,f", 0) != 0) throw Error(ErrorCode::FormatError, "header must be t,f");
      header = true;
      continue;
    }
    std::istringstream row(line);
    double t = 0.0;
    double f = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> f) || comma != ',') {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": expected t,f");
    }
    if (!log.t.empty() && !(t > log.t.back())) {
      throw Error(ErrorCode::SamplingError, "time must increase at line " + std::to_string(line_no));
    }
    log.t.push_back(t);
    log.f.push_back(f);
  }
  if (!header) throw Error(ErrorCode::FormatError, "missing header line");
  return log;
}

void write_step_log(std::ostream& out, const StepLog& log) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "t,f\n";
  for (std::size_t i = 0; i < log.t.size(); ++i) buf << log.t[i] << ',' << log.f[i] << '\n';
  out << buf.str();
}

StepFit fit_step_response(const StepLog& log, const StepFitOptions& options) {
  if (log.t.size() != log.f.size() || log.t.size() < 8) {
    throw Error(ErrorCode::FormatError, "step log needs at least 8 samples");
  }
  std::size_t first_post = 0;
  while (first_post < log.t.size() && log.t[first_post] < 0.0) ++first_post;
  const std::size_t n_post = log.t.size() - first_post;
  if (n_post < 8) throw Error(ErrorCode::NoStepDetected, "too few samples after t = 0");

  StepFit fit;
  if (first_post > 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < first_post; ++i) sum += log.f[i];
    fit.baseline = sum / static_cast<double>(first_post);
  }

  Problem p;
  p.t.assign(log.t.begin() + static_cast<std::ptrdiff_t>(first_post), log.t.end());
  p.g.reserve(n_post);
  for (std::size_t i = first_post; i < log.t.size(); ++i) p.g.push_back(log.f[i] - fit.baseline);
  for (double v : p.g) p.sum_gg += v * v;

  // Step size from the settled tail against the noise floor.
  const std::size_t tail = n_post - std::max<std::size_t>(4, n_post / 5);
  double step = 0.0;
  for (std::size_t i = tail; i < n_post; ++i) step += p.g[i];
  step /= static_cast<double>(n_post - tail);
  const double noise =
      first_post >= 8 ? variance(log.f, 0, first_post) : variance(p.g, tail, n_post);
  const double ratio = noise > 0.0 ? step * step / noise : (step != 0.0 ? INFINITY : 0.0);
  if (!(ratio >= options.min_variance_ratio)) {
    throw Error(ErrorCode::NoStepDetected,
                "step^2 / noise variance = " + std::to_string(ratio) + " below threshold");
  }

  const double dt = (p.t.back() - p.t.front()) / static_cast<double>(n_post - 1);
  const double span = p.t.back() - p.t.front();
  const double tp_lo = dt / 4.0;
  const double tp_hi = 2.0 * span;

  std::size_t best_index = 0;
  Inner best{0.0, INFINITY};
  for (std::size_t i = 0; i < n_post && p.t[i] <= options.max_delay_fraction * span; ++i) {
    const Inner in = best_tp(p, p.t[i], tp_lo, tp_hi);
    if (in.sse < best.sse) {
      best = in;
      best_index = i;
    }
  }

  // Between samples the cost is still continuous in tau_p.
  const double lo = best_index > 0 ? p.t[best_index - 1] : p.t[0];
  const double hi = best_index + 1 < n_post ? p.t[best_index + 1] : p.t[best_index];
  double tau = p.t[best_index];
  if (hi > lo) {
    const double refined =
        golden_min([&](double x) { return best_tp(p, x, tp_lo, tp_hi).sse; }, lo, hi, 50);
    const Inner in = best_tp(p, refined, tp_lo, tp_hi);
    if (in.sse <= best.sse) {
      best = in;
      tau = refined;
    }
  }
  fit.tau_p = tau;
  fit.tp = best.tp;
  const double sse = p.sse(tau, best.tp, &fit.k);
  fit.rms = std::sqrt(std::max(0.0, sse) / static_cast<double>(n_post));
  return fit;
}

}  // namespace mrftid

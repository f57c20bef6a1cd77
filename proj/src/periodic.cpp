#include "mrftid/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mrftid {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourOverPi = 4.0 / std::numbers::pi;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double horner(const std::vector<double>& poly, double x) {
  double acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> integrate(const std::vector<double>& poly) {
  std::vector<double> out(poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) out[i + 1] = poly[i] / static_cast<double>(i + 1);
  return out;
}

void accumulate(std::vector<double>& into, const std::vector<double>& poly, double weight) {
  if (into.size() < poly.size()) into.resize(poly.size(), 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) into[i] += weight * poly[i];
}

// Golden-section search for the maximum of f on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    if (f1 < f2) {
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
  return std::max(f1, f2);
}

Plant without_delay(const Plant& p) {
  return Plant(p.gain(), p.integrators(), p.numerator_time_constants(),
               p.denominator_time_constants(), 0.0);
}

}  // namespace

bool closed_form_supported(const Plant& plant) {
  const auto& den = plant.denominator_time_constants();
  for (std::size_t i = 0; i < den.size(); ++i) {
    for (std::size_t j = i + 1; j < den.size(); ++j) {
      if (std::abs(den[i] - den[j]) <= 1e-6 * std::max(den[i], den[j])) return false;
    }
  }
  return true;
}

PeriodicResponse::PeriodicResponse(const Plant& plant, double h, double omega,
                                   SeriesMethod method, const SeriesOptions& options)
    : h_(h), omega_(omega), period_(2.0 * kPi / omega), delay_(plant.delay()),
      method_(method), options_(options) {
  if (!std::isfinite(omega) || !(omega > 0.0)) {
    throw Error(ErrorCode::InvalidFrequency, "frequency must be positive");
  }
  if (method_ == SeriesMethod::ClosedForm && !closed_form_supported(plant)) {
    method_ = SeriesMethod::Fourier;
  }
  if (method_ == SeriesMethod::ClosedForm) {
    build_closed_form(plant);
  } else {
    build_fourier(plant);
  }
}

void PeriodicResponse::build_closed_form(const Plant& plant) {
  const int n = plant.integrators();
  const double k0 = plant.gain();
  const auto& num = plant.numerator_time_constants();
  const auto& den = plant.denominator_time_constants();
  const double half = 0.5 * period_;

  // Residues of the simple lag poles at s = -1/T_D.
  for (std::size_t j = 0; j < den.size(); ++j) {
    const double p = 1.0 / den[j];
    double r = k0 / (std::pow(-p, n) * den[j]);
    for (double tn : num) r *= 1.0 - tn * p;
    for (std::size_t l = 0; l < den.size(); ++l) {
      if (l != j) r /= 1.0 - den[l] * p;
    }
    const double e_half = std::exp(-p * half);
    lags_.push_back({p, h_ * r / p, 2.0 * h_ * r / (p * (1.0 + e_half)),
                     2.0 * h_ * r / (1.0 + e_half)});
  }

  if (n == 0) return;
  // Laurent coefficients at the origin: c_m multiplies 1/s^m, c_m = f_{n-m} where f is the
  // Taylor series of s^n W(s).
  std::vector<double> taylor(static_cast<std::size_t>(n), 0.0);
  taylor[0] = k0;
  auto multiply = [&](auto&& factor) {
    std::vector<double> out(taylor.size(), 0.0);
    for (std::size_t i = 0; i < taylor.size(); ++i) {
      for (std::size_t k = 0; i + k < taylor.size(); ++k) out[i + k] += taylor[i] * factor(k);
    }
    taylor = std::move(out);
  };
  for (double tn : num) multiply([tn](std::size_t k) { return k == 0 ? 1.0 : (k == 1 ? tn : 0.0); });
  for (double td : den) multiply([td](std::size_t k) { return std::pow(-td, static_cast<double>(k)); });

  // Antisymmetric periodic solutions of the integrator chain under the unit square wave.
  std::vector<double> prev{1.0};
  for (int m = 1; m <= n; ++m) {
    std::vector<double> next = integrate(prev);
    next[0] = -0.5 * horner(next, half);
    const double c = h_ * taylor[static_cast<std::size_t>(n - m)];
    accumulate(chain_, next, c);
    accumulate(chain_derivative_, prev, c);
    prev = std::move(next);
  }
}

void PeriodicResponse::build_fourier(const Plant& plant) {
  const Plant rational = without_delay(plant);
  const auto& num = plant.numerator_time_constants();
  const auto& den = plant.denominator_time_constants();
  const int q = plant.order();

  // A(w) <= |K| prod(1 + T_N w) / (w^q prod T_D); expand the numerator in powers of w.
  std::vector<double> expansion = detail::lag_polynomial(num);
  double den_product = 1.0;
  for (double td : den) den_product *= td;
  const double lead = std::abs(plant.gain()) / den_product;

  auto tail = [&](long harmonics) {
    // Integral bound of sum_{k > K} U((2k-1) w) / (2k - 1), U decreasing.
    double bound = 0.0;
    const double base = 2.0 * static_cast<double>(harmonics) - 1.0;
    for (std::size_t m = 0; m < expansion.size(); ++m) {
      const double power = static_cast<double>(q) - static_cast<double>(m);
      bound += lead * expansion[m] * std::pow(omega_, -power) * std::pow(base, -power) /
               (2.0 * power);
    }
    return kFourOverPi * bound;
  };

  const double scale = kFourOverPi * magnitude(rational, omega_);
  const double target = options_.rel_tol * scale;
  long lo = 1;
  long hi = 1;
  while (tail(hi) >= target) {
    if (hi >= options_.max_harmonics) {
      throw Error(ErrorCode::SeriesNotConverged,
                  "tail bound not met within " + std::to_string(options_.max_harmonics) +
                      " harmonics");
    }
    lo = hi;
    hi = std::min<long>(hi * 2, options_.max_harmonics);
  }
  while (hi - lo > 1) {
    const long mid = (lo + hi) / 2;
    (tail(mid) < target ? hi : lo) = mid;
  }
  const long harmonics = tail(lo) < target ? lo : hi;
  tail_bound_ = tail(harmonics) / scale;

  coeffs_.reserve(static_cast<std::size_t>(harmonics));
  for (long k = 1; k <= harmonics; ++k) {
    const double order = 2.0 * static_cast<double>(k) - 1.0;
    const double w = order * omega_;
    coeffs_.push_back(std::polar(magnitude(rational, w) / order, phase(rational, w)));
  }
}

double PeriodicResponse::half_period_value(double s) const {
  double v = horner(chain_, s);
  for (const auto& lag : lags_) v += lag.offset - lag.decay * std::exp(-lag.rate * s);
  return v;
}

double PeriodicResponse::half_period_derivative(double s) const {
  double v = horner(chain_derivative_, s);
  for (const auto& lag : lags_) {
    v += lag.slope * std::exp(-lag.rate * s);
  }
  return v;
}

double PeriodicResponse::fourier_value(double s) const {
  const std::complex<double> z = std::polar(1.0, omega_ * s);
  const std::complex<double> z2 = z * z;
  std::complex<double> w = z;
  std::complex<double> acc = 0.0;
  for (const auto& c : coeffs_) {
    acc += c * w;
    w *= z2;
  }
  return kFourOverPi * h_ * acc.imag();
}

double PeriodicResponse::fourier_derivative(double s) const {
  const std::complex<double> z = std::polar(1.0, omega_ * s);
  const std::complex<double> z2 = z * z;
  std::complex<double> w = z;
  double acc = 0.0;
  double order = 1.0;
  for (const auto& c : coeffs_) {
    acc += order * (c * w).real();
    w *= z2;
    order += 2.0;
  }
  return kFourOverPi * h_ * omega_ * acc;
}

double PeriodicResponse::delay_free(double s) const {
  if (method_ == SeriesMethod::Fourier) return fourier_value(s);
  double r = std::fmod(s, period_);
  if (r < 0.0) r += period_;
  const double half = 0.5 * period_;
  return r < half ? half_period_value(r) : -half_period_value(r - half);
}

double PeriodicResponse::delay_free_derivative(double s) const {
  if (method_ == SeriesMethod::Fourier) return fourier_derivative(s);
  double r = std::fmod(s, period_);
  if (r < 0.0) r += period_;
  const double half = 0.5 * period_;
  return r < half ? half_period_derivative(r) : -half_period_derivative(r - half);
}

double PeriodicResponse::amplitude() const {
  // |y| repeats every half period, so one half period is sampled.
  const int samples = std::max(8, options_.samples_per_period / 2);
  const double step = 0.5 * period_ / samples;
  int best = 0;
  double best_value = -1.0;
  auto consider = [&](int i, double v) {
    if (std::abs(v) > best_value) {
      best_value = std::abs(v);
      best = i;
    }
  };
  if (method_ == SeriesMethod::Fourier) {
    for (int i = 0; i < samples; ++i) consider(i, fourier_value(i * step));
  } else {
    // Exponentials advance by a constant factor per sample.
    std::vector<double> decay(lags_.size(), 1.0);
    std::vector<double> factor(lags_.size());
    for (std::size_t j = 0; j < lags_.size(); ++j) factor[j] = std::exp(-lags_[j].rate * step);
    for (int i = 0; i < samples; ++i) {
      double v = horner(chain_, i * step);
      for (std::size_t j = 0; j < lags_.size(); ++j) {
        v += lags_[j].offset - lags_[j].decay * decay[j];
        decay[j] *= factor[j];
      }
      consider(i, v);
    }
  }
  const double centre = best * step;
  const double refined = golden_max([this](double s) { return std::abs(delay_free(s)); },
                                    centre - step, centre + step, 1e-13 * period_);
  return std::max(best_value, refined);
}

double periodic_output(const Plant& plant, double h, double omega, double t, SeriesMethod method,
                       const SeriesOptions& options) {
  return PeriodicResponse(plant, h, omega, method, options)(t);
}

double output_amplitude(const Plant& plant, double h, double omega, SeriesMethod method,
                        const SeriesOptions& options) {
  return PeriodicResponse(plant, h, omega, method, options).amplitude();
}

PeriodicSolution periodic_solution(const Plant& plant, double h, double omega,
                                   SeriesMethod method, const SeriesOptions& options) {
  const PeriodicResponse response(plant, h, omega, method, options);
  PeriodicSolution out;
  out.omega = omega;
  out.y_switch = response.at_switch();
  // The switching instant is itself a sample of |y|, so a_y >= |y_s| holds by definition.
  out.a_y = std::max(response.amplitude(), std::abs(out.y_switch));
  out.phi = {-std::sqrt(std::max(0.0, out.a_y * out.a_y - out.y_switch * out.y_switch)),
             out.y_switch};
  out.harmonics_used = response.harmonics_used();
  out.truncation_error_bound = response.truncation_bound();
  return out;
}

std::complex<double> phi(const Plant& plant, double h, double omega, SeriesMethod method,
                         const SeriesOptions& options) {
  return periodic_solution(plant, h, omega, method, options).phi;
}

}  // namespace mrftid

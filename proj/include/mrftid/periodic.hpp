#pragma once

#include <complex>
#include <vector>

#include "mrftid/plant.hpp"

namespace mrftid {

/// How the steady periodic output under a symmetric square-wave input is evaluated.
enum class SeriesMethod {
  /// Odd-harmonic sum evaluated in closed form, one exponential segment per lag and a
  /// polynomial segment for the integrator chain. Requires distinct lag time constants;
  /// otherwise the Fourier route is used.
  ClosedForm,
  /// Truncated odd-harmonic Fourier series with an analytic bound on the discarded tail.
  Fourier,
};

struct SeriesOptions {
  double rel_tol = 1e-8;
  int max_harmonics = 100000;
  int samples_per_period = 2048;
};

/**
 * Periodic steady-state output y(t) of a plant driven by the square wave that switches from
 * -h to +h at t = 0 and back at t = pi/omega. The waveform is half-wave antisymmetric,
 * y(t + pi/omega) = -y(t), and has zero mean.
 */
class PeriodicResponse {
 public:
  PeriodicResponse(const Plant& plant, double h, double omega,
                   SeriesMethod method = SeriesMethod::ClosedForm,
                   const SeriesOptions& options = {});

  [[nodiscard]] double operator()(double t) const { return delay_free(t - delay_); }
  [[nodiscard]] double derivative(double t) const { return delay_free_derivative(t - delay_); }

  /// Output at the -h to +h switching instant.
  [[nodiscard]] double at_switch() const { return (*this)(0.0); }

  /// max |y(t)| over one period: dense sampling, then golden-section refinement.
  [[nodiscard]] double amplitude() const;

  /// Response of the rational part alone; the delay only shifts it in time.
  [[nodiscard]] double delay_free(double s) const;
  [[nodiscard]] double delay_free_derivative(double s) const;

  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] double period() const { return period_; }
  [[nodiscard]] SeriesMethod method() const { return method_; }
  /// Harmonics summed; zero for the closed form.
  [[nodiscard]] int harmonics_used() const { return static_cast<int>(coeffs_.size()); }
  /// Relative bound on the truncated tail; zero for the closed form.
  [[nodiscard]] double truncation_bound() const { return tail_bound_; }

 private:
  // Lag r/(s + p) under the square wave: offset - decay * exp(-p s) on the first half period.
  struct Lag {
    double rate;
    double offset;
    double decay;
    double slope;
  };

  void build_closed_form(const Plant& plant);
  void build_fourier(const Plant& plant);
  [[nodiscard]] double half_period_value(double s) const;
  [[nodiscard]] double half_period_derivative(double s) const;
  [[nodiscard]] double fourier_value(double s) const;
  [[nodiscard]] double fourier_derivative(double s) const;

  double h_;
  double omega_;
  double period_;
  double delay_;
  SeriesMethod method_;
  SeriesOptions options_;

  // closed form
  std::vector<Lag> lags_;
  // integrator chain: sum_m c_m P_m(s); stored as one polynomial and its derivative
  std::vector<double> chain_;
  std::vector<double> chain_derivative_;

  // Fourier: delay-free harmonic coefficients A_k exp(j phi_k) / (2k - 1)
  std::vector<std::complex<double>> coeffs_;
  double tail_bound_ = 0.0;
};

/// True when the closed form is usable, i.e. lag time constants are well separated.
bool closed_form_supported(const Plant& plant);

/// Values that define the LPRS Phi(omega) at one frequency.
struct PeriodicSolution {
  double omega = 0.0;
  double a_y = 0.0;
  double y_switch = 0.0;
  std::complex<double> phi;
  int harmonics_used = 0;
  double truncation_error_bound = 0.0;
};

double periodic_output(const Plant& plant, double h, double omega, double t,
                       SeriesMethod method = SeriesMethod::Fourier,
                       const SeriesOptions& options = {});

double output_amplitude(const Plant& plant, double h, double omega,
                        SeriesMethod method = SeriesMethod::Fourier,
                        const SeriesOptions& options = {});

/// Phi = -sqrt(a_y^2 - y_s^2) + j y_s with y_s the output at the -h to +h switch.
PeriodicSolution periodic_solution(const Plant& plant, double h, double omega,
                                   SeriesMethod method = SeriesMethod::Fourier,
                                   const SeriesOptions& options = {});

std::complex<double> phi(const Plant& plant, double h, double omega,
                         SeriesMethod method = SeriesMethod::Fourier,
                         const SeriesOptions& options = {});

}  // namespace mrftid

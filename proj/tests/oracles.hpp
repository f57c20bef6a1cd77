#pragma once

// Reference computations that share no code path with the library.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

// SOIPTD transfer function with jw substituted term by term.
inline cd soiptd_response(double K, double Tp, double Td, double tau, double w) {
  const cd s(0.0, w);
  return K * Td * std::exp(-s * tau) / (s * (Tp * s + 1.0) * (Td * s + 1.0));
}

// C (jwI - A)^-1 B exp(-jw tau) by a dense complex solve.
inline cd state_space_response(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const Eigen::RowVectorXd& C, double tau, double w) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXcd M = cd(0.0, w) * Eigen::MatrixXcd::Identity(n, n) - A.cast<cd>();
  Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<cd>());
  return (C.cast<cd>() * x)(0) * std::exp(cd(0.0, -w * tau));
}

// The simulated attitude model: states (theta, rate, moment) with the lag pole at -10.
inline void attitude_state_space(Eigen::MatrixXd& A, Eigen::VectorXd& B, Eigen::RowVectorXd& C) {
  A.setZero(3, 3);
  A(0, 1) = 1.0;
  A(1, 1) = -1.42;
  A(1, 2) = 1.42;
  A(2, 2) = -10.0;
  B.setZero(3);
  B(2) = 1.4;
  C.setZero(3);
  C(0) = 1.0;
}

// Open-loop response of K0 / (s^n prod(T s + 1)) to the +h/-h square wave that rises at
// t = 0, by brute-force RK4 over many periods. Returns y at s = k T / samples over the last
// period with the mean removed (an integrator leaves an arbitrary offset). n <= 1.
inline std::vector<double> square_wave_response(double K0, int integrators,
                                                const std::vector<double>& lags, double h,
                                                double omega, int samples, int periods = 60,
                                                int steps_per_sample = 400) {
  const std::size_t m = lags.size();
  const std::size_t n = m + static_cast<std::size_t>(integrators);
  auto rhs = [&](const std::vector<double>& x, double u) {
    std::vector<double> d(n);
    double in = K0 * u;
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = (in - x[i]) / lags[i];
      in = x[i];
    }
    for (std::size_t i = m; i < n; ++i) {
      d[i] = in;
      in = x[i];
    }
    return d;
  };
  const double T = 2.0 * std::numbers::pi / omega;
  const int per_period = samples * steps_per_sample;
  const double dt = T / per_period;
  std::vector<double> x(n, 0.0), out(static_cast<std::size_t>(samples));
  for (int p = 0; p < periods; ++p) {
    for (int k = 0; k < per_period; ++k) {
      if (p == periods - 1 && k % steps_per_sample == 0) {
        out[static_cast<std::size_t>(k / steps_per_sample)] = x[n - 1];
      }
      const double u = k < per_period / 2 ? h : -h;
      auto add = [&](const std::vector<double>& a, const std::vector<double>& b, double c) {
        std::vector<double> r(a);
        for (std::size_t i = 0; i < n; ++i) r[i] += c * b[i];
        return r;
      };
      const auto k1 = rhs(x, u);
      const auto k2 = rhs(add(x, k1, dt / 2), u);
      const auto k3 = rhs(add(x, k2, dt / 2), u);
      const auto k4 = rhs(add(x, k3, dt), u);
      for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
  }
  // Samples are equally spaced, so their mean is the period mean up to O(1/samples^2) for
  // a smooth waveform; good enough against the tolerances used.
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= samples;
  for (double& v : out) v -= mean;
  return out;
}

struct Oscillation {
  double frequency_hz;
  double amplitude;
};

// Closed loop of K0 / (s prod(T s + 1)) e^{-tau s} with the MRFT, forward Euler at a step that
// divides tau, delay as a plain sample queue. The relay fires on the rising edge of its
// switching condition; peaks restart at each switch.
inline Oscillation mrft_closed_loop(double K0, const std::vector<double>& lags, double tau,
                                    double beta, double h, double duration, double dt) {
  const std::size_t m = lags.size();
  std::vector<double> x(m + 1, 0.0);
  const auto delay_steps = static_cast<std::size_t>(std::llround(tau / dt));
  std::vector<double> line(delay_steps + 1, 0.0);
  std::size_t head = 0;
  double u = h, e_max = 0.0, e_min = 0.0;
  bool was_true = true;
  std::vector<double> rises;
  std::vector<double> ys, ts;
  const auto steps = static_cast<long>(duration / dt);
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double y = x[m];
    const double e = -y;
    e_max = std::max(e_max, e);
    e_min = std::min(e_min, e);
    const double b_down = -beta * e_max;
    const double b_up = -beta * e_min;
    const bool cond = u > 0 ? (e <= b_down && (b_down != 0.0 || e < 0.0))
                            : (e >= b_up && (b_up != 0.0 || e > 0.0));
    if (cond && !was_true) {
      u = -u;
      if (u > 0) rises.push_back(t);
      e_max = std::max(0.0, e);
      e_min = std::min(0.0, e);
      was_true = true;
    } else {
      was_true = cond;
    }
    if (t > duration / 2) {
      ts.push_back(t);
      ys.push_back(y);
    }
    line[head] = u;
    head = (head + 1) % line.size();
    const double ud = line[head];  // oldest entry, written delay_steps steps ago
    double in = K0 * ud;
    std::vector<double> d(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = (in - x[i]) / lags[i];
      in = x[i];
    }
    d[m] = in;
    for (std::size_t i = 0; i <= m; ++i) x[i] += dt * d[i];
  }
  const std::size_t n = rises.size();
  const int periods = 10;
  const double period = (rises[n - 1] - rises[n - 1 - periods]) / periods;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= rises[n - 1 - periods]) {
      lo = std::min(lo, ys[i]);
      hi = std::max(hi, ys[i]);
    }
  }
  return {1.0 / period, (hi - lo) / 2.0};
}

struct StepData {
  std::vector<double> t;
  std::vector<double> f;
};

// k (1 - exp(-(t - tau)/Tp)) after tau, zero before, sampled from -0.1 s to 0.4 s at 1 ms
// with additive Gaussian noise of standard deviation noise * k.
inline StepData step_response(double k, double Tp, double tau, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  StepData d;
  for (int i = -100; i <= 400; ++i) {
    const double t = i * 1e-3;
    const double v = t >= tau ? k * (1.0 - std::exp(-(t - tau) / Tp)) : 0.0;
    d.t.push_back(t);
    d.f.push_back(v + noise * k * n01(rng));
  }
  return d;
}

}  // namespace oracle

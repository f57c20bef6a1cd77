#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrftid/error.hpp"

namespace mrftid {

template <typename Scalar>
constexpr Scalar hz_to_rad(Scalar hz) {
  return Scalar(2) * std::numbers::pi_v<Scalar> * hz;
}

template <typename Scalar>
constexpr Scalar rad_to_hz(Scalar omega) {
  return omega / (Scalar(2) * std::numbers::pi_v<Scalar>);
}

/**
 * Strictly proper linear plant with transport delay,
 *
 *   W(s) = K * prod_i (T_Ni s + 1) * exp(-tau s) / (s^n * prod_j (T_Dj s + 1)).
 *
 * Immutable once constructed; the constructor enforces the invariants.
 */
template <typename Scalar>
class TimeDelayLTI {
 public:
  TimeDelayLTI(Scalar gain, int integrators, std::vector<Scalar> numerator_time_constants,
               std::vector<Scalar> denominator_time_constants, Scalar delay)
      : gain_(gain),
        integrators_(integrators),
        num_(std::move(numerator_time_constants)),
        den_(std::move(denominator_time_constants)),
        delay_(delay) {
    using std::isfinite;
    if (!isfinite(gain_) || gain_ == Scalar(0)) {
      throw Error(ErrorCode::InvalidParameter, "plant gain must be finite and non-zero");
    }
    if (integrators_ < 0) {
      throw Error(ErrorCode::InvalidParameter, "integrator count must be non-negative");
    }
    for (const auto* set : {&num_, &den_}) {
      for (Scalar tc : *set) {
        if (!isfinite(tc) || !(tc > Scalar(0))) {
          throw Error(ErrorCode::InvalidParameter, "time constants must be finite and positive");
        }
      }
    }
    if (!isfinite(delay_) || delay_ < Scalar(0)) {
      throw Error(ErrorCode::InvalidParameter, "delay must be finite and non-negative");
    }
    if (integrators_ + static_cast<int>(den_.size()) <= static_cast<int>(num_.size())) {
      throw Error(ErrorCode::InvalidParameter, "plant must be strictly proper");
    }
  }

  [[nodiscard]] Scalar gain() const { return gain_; }
  [[nodiscard]] int integrators() const { return integrators_; }
  [[nodiscard]] const std::vector<Scalar>& numerator_time_constants() const { return num_; }
  [[nodiscard]] const std::vector<Scalar>& denominator_time_constants() const { return den_; }
  [[nodiscard]] Scalar delay() const { return delay_; }

  /// Number of poles minus number of zeros of the rational part.
  [[nodiscard]] int relative_degree() const {
    return integrators_ + static_cast<int>(den_.size()) - static_cast<int>(num_.size());
  }
  [[nodiscard]] int order() const { return integrators_ + static_cast<int>(den_.size()); }

  /// Sum of all time parameters including the delay; sets the natural frequency scale.
  [[nodiscard]] Scalar time_scale_sum() const {
    Scalar sum = delay_;
    for (Scalar tc : num_) sum += tc;
    for (Scalar tc : den_) sum += tc;
    return sum;
  }

  friend bool operator==(const TimeDelayLTI&, const TimeDelayLTI&) = default;

 private:
  Scalar gain_;
  int integrators_;
  std::vector<Scalar> num_;
  std::vector<Scalar> den_;
  Scalar delay_;
};

using Plant = TimeDelayLTI<double>;

/// Second order plus integrator plus time delay model K*Td*exp(-tau s) / (s (Tp s + 1)(Td s + 1)).
template <typename Scalar>
struct SoiptdParams {
  Scalar K;
  Scalar Tp;
  Scalar Td;
  Scalar tau;
};

/// The K*Td numerator is folded into the plant gain, so time scaling keeps the gain of the
/// general form fixed and gain scaling touches nothing else.
template <typename Scalar>
TimeDelayLTI<Scalar> soiptd(const SoiptdParams<Scalar>& p) {
  using std::isfinite;
  if (!isfinite(p.K) || !(p.K > Scalar(0))) {
    throw Error(ErrorCode::InvalidParameter, "SOIPTD gain K must be positive");
  }
  if (!isfinite(p.Tp) || !(p.Tp > Scalar(0)) || !isfinite(p.Td) || !(p.Td > Scalar(0))) {
    throw Error(ErrorCode::InvalidParameter, "SOIPTD time constants must be positive");
  }
  if (!isfinite(p.tau) || p.tau < Scalar(0)) {
    throw Error(ErrorCode::InvalidParameter, "SOIPTD delay must be non-negative");
  }
  return TimeDelayLTI<Scalar>(p.K * p.Td, 1, {}, {p.Tp, p.Td}, p.tau);
}

/// Inverse of soiptd() for plants with the SOIPTD structure.
template <typename Scalar>
SoiptdParams<Scalar> soiptd_params(const TimeDelayLTI<Scalar>& plant) {
  const auto& den = plant.denominator_time_constants();
  if (plant.integrators() != 1 || den.size() != 2 || !plant.numerator_time_constants().empty()) {
    throw Error(ErrorCode::InvalidParameter, "plant does not have SOIPTD structure");
  }
  return {plant.gain() / den[1], den[0], den[1], plant.delay()};
}

template <typename Scalar>
Scalar magnitude(const TimeDelayLTI<Scalar>& plant, Scalar omega) {
  using std::abs;
  using std::pow;
  using std::sqrt;
  if (!(omega > Scalar(0))) throw Error(ErrorCode::InvalidFrequency, "frequency must be positive");
  Scalar mag = abs(plant.gain()) / pow(omega, plant.integrators());
  for (Scalar tc : plant.numerator_time_constants()) mag *= sqrt(tc * omega * tc * omega + Scalar(1));
  for (Scalar tc : plant.denominator_time_constants()) mag /= sqrt(tc * omega * tc * omega + Scalar(1));
  return mag;
}

/// Unwrapped phase from the closed-form arctangent sum; values below -pi are kept as is.
template <typename Scalar>
Scalar phase(const TimeDelayLTI<Scalar>& plant, Scalar omega) {
  using std::atan;
  if (!(omega > Scalar(0))) throw Error(ErrorCode::InvalidFrequency, "frequency must be positive");
  Scalar ph = -Scalar(plant.integrators()) * std::numbers::pi_v<Scalar> / Scalar(2) -
              plant.delay() * omega;
  if (plant.gain() < Scalar(0)) ph -= std::numbers::pi_v<Scalar>;
  for (Scalar tc : plant.numerator_time_constants()) ph += atan(tc * omega);
  for (Scalar tc : plant.denominator_time_constants()) ph -= atan(tc * omega);
  return ph;
}

template <typename Scalar>
std::complex<Scalar> freq_response(const TimeDelayLTI<Scalar>& plant, Scalar omega) {
  return std::polar(magnitude(plant, omega), phase(plant, omega));
}

template <typename Scalar>
TimeDelayLTI<Scalar> gain_scale(const TimeDelayLTI<Scalar>& plant, Scalar alpha) {
  if (!(alpha != Scalar(0))) throw Error(ErrorCode::InvalidParameter, "gain scale must be non-zero");
  return TimeDelayLTI<Scalar>(plant.gain() * alpha, plant.integrators(),
                              plant.numerator_time_constants(),
                              plant.denominator_time_constants(), plant.delay());
}

/// Multiplies every time constant and the delay by gamma; gain and integrator count are kept.
template <typename Scalar>
TimeDelayLTI<Scalar> time_scale(const TimeDelayLTI<Scalar>& plant, Scalar gamma) {
  using std::isfinite;
  if (!isfinite(gamma) || !(gamma > Scalar(0))) {
    throw Error(ErrorCode::InvalidParameter, "time scale must be positive");
  }
  auto scaled = [gamma](std::vector<Scalar> v) {
    for (auto& tc : v) tc *= gamma;
    return v;
  };
  return TimeDelayLTI<Scalar>(plant.gain(), plant.integrators(),
                              scaled(plant.numerator_time_constants()),
                              scaled(plant.denominator_time_constants()), plant.delay() * gamma);
}

/// Rigid-body roll/pitch channel with first-order propulsion lag, linearized about hover.
template <typename Scalar>
struct AttitudeParams {
  Scalar inertia;         ///< J_x [kg m^2]
  Scalar rotational_drag; ///< B_x [N m s]
  Scalar moment_gain;     ///< k_M [N m per unit command]
  Scalar Tp;              ///< propulsion time constant [s]
  Scalar tau_p;           ///< propulsion delay [s]
  Scalar tau_imu;         ///< IMU and processing delay [s]
};

/// Altitude channel: vertical drag D_z, collective thrust of mu_n rotors.
template <typename Scalar>
struct AltitudeParams {
  Scalar mass;        ///< m [kg]
  Scalar thrust_gain; ///< k_F [N per unit command]
  Scalar rotor_count; ///< mu_n
  Scalar drag;        ///< D_z [1/s]
  Scalar Tp;
  Scalar tau_p;
  Scalar tau_pos; ///< position sensor and flight computer delay [s]
};

// theta/u = k_M / ((Tp s + 1)(J s + B) s), so Td = J/B and K*Td = k_M/B, i.e. K = k_M/J.
template <typename Scalar>
TimeDelayLTI<Scalar> attitude_plant(const AttitudeParams<Scalar>& a) {
  if (!(a.inertia > Scalar(0)) || !(a.moment_gain > Scalar(0)) || !(a.tau_p >= Scalar(0)) ||
      !(a.tau_imu >= Scalar(0)) || a.rotational_drag < Scalar(0)) {
    throw Error(ErrorCode::InvalidParameter, "attitude parameters out of range");
  }
  if (a.rotational_drag == Scalar(0)) {
    throw Error(ErrorCode::DegenerateDrag, "zero rotational drag leaves Td undefined");
  }
  return soiptd<Scalar>({a.moment_gain / a.inertia, a.Tp, a.inertia / a.rotational_drag,
                         a.tau_p + a.tau_imu});
}

// z/u = mu_n k_F / m / ((Tp s + 1)(s + D_z) s), so Td = 1/D_z and K = mu_n k_F / m.
template <typename Scalar>
TimeDelayLTI<Scalar> altitude_plant(const AltitudeParams<Scalar>& a) {
  if (!(a.mass > Scalar(0)) || !(a.thrust_gain > Scalar(0)) || !(a.rotor_count > Scalar(0)) ||
      !(a.tau_p >= Scalar(0)) || !(a.tau_pos >= Scalar(0)) || a.drag < Scalar(0)) {
    throw Error(ErrorCode::InvalidParameter, "altitude parameters out of range");
  }
  if (a.drag == Scalar(0)) {
    throw Error(ErrorCode::DegenerateDrag, "zero vertical drag leaves Td undefined");
  }
  return soiptd<Scalar>({a.rotor_count * a.thrust_gain / a.mass, a.Tp, Scalar(1) / a.drag,
                         a.tau_p + a.tau_pos});
}

/// Delay-free rational part in controllable canonical form, y = C x, x' = A x + B u.
template <typename Scalar>
struct StateSpace {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> B;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> C;
};

namespace detail {

// Ascending-power coefficients of prod (tc s + 1).
template <typename Scalar>
std::vector<Scalar> lag_polynomial(const std::vector<Scalar>& time_constants) {
  std::vector<Scalar> poly{Scalar(1)};
  for (Scalar tc : time_constants) {
    std::vector<Scalar> next(poly.size() + 1, Scalar(0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += poly[i] * tc;
    }
    poly = std::move(next);
  }
  return poly;
}

}  // namespace detail

template <typename Scalar>
StateSpace<Scalar> realize(const TimeDelayLTI<Scalar>& plant) {
  std::vector<Scalar> num = detail::lag_polynomial(plant.numerator_time_constants());
  for (auto& c : num) c *= plant.gain();
  std::vector<Scalar> den_lags = detail::lag_polynomial(plant.denominator_time_constants());
  const int n = plant.order();
  std::vector<Scalar> den(static_cast<std::size_t>(n) + 1, Scalar(0));
  for (std::size_t i = 0; i < den_lags.size(); ++i) den[i + plant.integrators()] = den_lags[i];
  const Scalar lead = den.back();

  StateSpace<Scalar> ss;
  ss.A.setZero(n, n);
  ss.B.setZero(n);
  ss.C.setZero(n);
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = Scalar(1);
  for (int i = 0; i < n; ++i) ss.A(n - 1, i) = -den[i] / lead;
  ss.B(n - 1) = Scalar(1);
  for (std::size_t i = 0; i < num.size(); ++i) ss.C(static_cast<Eigen::Index>(i)) = num[i] / lead;
  return ss;
}

}  // namespace mrftid

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mrftid/plant.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mrftid;
using support::log_uniform;
using support::uniform;

namespace {

Plant random_soiptd(std::mt19937_64& rng) {
  return soiptd<double>({log_uniform(rng, 0.05, 20.0), log_uniform(rng, 0.005, 0.5),
                         log_uniform(rng, 0.05, 20.0), uniform(rng, 0.0, 0.3)});
}

Plant random_general(std::mt19937_64& rng) {
  const int n_int = static_cast<int>(rng() % 3);
  const int n_den = 1 + static_cast<int>(rng() % 3);
  std::vector<double> den, num;
  for (int i = 0; i < n_den; ++i) den.push_back(log_uniform(rng, 0.01, 5.0));
  if (n_int + n_den >= 2 && rng() % 2) num.push_back(log_uniform(rng, 0.01, 1.0));
  return Plant(log_uniform(rng, 0.1, 10.0), n_int, num, den, uniform(rng, 0.0, 0.2));
}

}  // namespace

TEST_CASE("soiptd stores K*Td and round-trips its parameters") {
  const Plant p = soiptd<double>({2.0, 0.1, 0.7, 0.06});
  CHECK(p.gain() == doctest::Approx(1.4));
  CHECK(p.integrators() == 1);
  const auto q = soiptd_params(p);
  CHECK(q.K == doctest::Approx(2.0));
  CHECK(q.Tp == 0.1);
  CHECK(q.Td == 0.7);
  CHECK(q.tau == 0.06);

  CHECK_NOTHROW(soiptd<double>({1.0, 0.1, 0.7, 0.0}));
  CHECK_THROWS_AS(soiptd<double>({1.0, -0.1, 0.7, 0.06}), Error);
  CHECK_THROWS_AS(soiptd<double>({0.0, 0.1, 0.7, 0.06}), Error);
  CHECK_THROWS_AS(soiptd<double>({1.0, 0.1, 0.7, -0.01}), Error);
  CHECK_THROWS_AS(Plant(1.0, 0, {0.1}, {0.2}, 0.0), Error);
  try {
    soiptd<double>({1.0, -0.1, 0.7, 0.06});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParameter);
  }
}

TEST_CASE("the template works for other scalar types") {
  const auto pf = soiptd<float>({1.0f, 0.1f, 0.7f, 0.06f});
  const auto pl = soiptd<long double>({1.0L, 0.1L, 0.7L, 0.06L});
  CHECK(std::abs(magnitude(pf, 3.0f) - static_cast<float>(magnitude(pl, 3.0L))) < 1e-5f);
  CHECK(std::abs(phase(pf, 3.0f) - static_cast<float>(phase(pl, 3.0L))) < 1e-5f);
}

TEST_CASE("pure integrator at 1 rad/s") {
  const Plant p(1.0, 1, {}, {}, 0.0);
  const auto w = freq_response(p, 1.0);
  CHECK(w.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w.imag() == doctest::Approx(-1.0));
  CHECK(phase(p, 1.0) == doctest::Approx(-std::numbers::pi / 2));
  CHECK_THROWS_AS(freq_response(p, 0.0), Error);
}

TEST_CASE("product form agrees with direct substitution") {
  const double w = 2 * std::numbers::pi * 1.022;
  const auto ref = oracle::soiptd_response(1.0, 0.1, 0.7042, 0.06, w);
  const auto got = freq_response(soiptd<double>({1.0, 0.1, 0.7042, 0.06}), w);
  CHECK(std::abs(got - ref) / std::abs(ref) < 1e-12);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const double K = log_uniform(rng, 0.05, 20.0), Tp = log_uniform(rng, 0.005, 0.5);
    const double Td = log_uniform(rng, 0.05, 20.0), tau = uniform(rng, 0.0, 0.3);
    const double om = log_uniform(rng, 0.01, 300.0);
    const auto r = oracle::soiptd_response(K, Tp, Td, tau, om);
    const auto g = freq_response(soiptd<double>({K, Tp, Td, tau}), om);
    CHECK(std::abs(g - r) / std::abs(r) < 1e-12);
  }
}

TEST_CASE("phase is unwrapped below -pi") {
  const Plant p = soiptd<double>({1.0, 0.1, 0.7, 0.5});
  const double om = 20.0;
  const double expected = -std::numbers::pi / 2 - std::atan(0.1 * om) - std::atan(0.7 * om) - 0.5 * om;
  CHECK(phase(p, om) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(phase(p, om) < -3 * std::numbers::pi);
}

TEST_CASE("state-space realization matches the rational part") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Plant p = random_general(rng);
    const auto ss = realize(p);
    for (int k = 0; k < 5; ++k) {
      const double om = log_uniform(rng, 0.05, 100.0);
      const auto ref = oracle::state_space_response(ss.A, ss.B, ss.C.transpose(), p.delay(), om);
      const auto got = freq_response(p, om);
      CHECK(std::abs(got - ref) / std::abs(ref) < 1e-9);
    }
  }
}

TEST_CASE("simulated attitude model equals SOIPTD(0.14*1.42, 0.1, 1/1.42, 0.06)") {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  oracle::attitude_state_space(A, B, C);
  const Plant p = support::attitude_example();
  std::mt19937_64 rng(26);
  for (int i = 0; i < 20; ++i) {
    const double om = log_uniform(rng, 0.1, 100.0);
    const auto ref = oracle::state_space_response(A, B, C, 0.06, om);
    CHECK(std::abs(freq_response(p, om) - ref) / std::abs(ref) < 1e-12);
  }
}

TEST_CASE("gain and time scaling") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Plant p = random_general(rng);
    const double alpha = log_uniform(rng, 0.01, 100.0);
    const double gamma = log_uniform(rng, 0.1, 10.0);
    const double om = log_uniform(rng, 0.05, 50.0);

    const Plant g = gain_scale(p, alpha);
    CHECK(phase(g, om) == phase(p, om));
    CHECK(std::abs(freq_response(g, om) - alpha * freq_response(p, om)) <=
          1e-13 * std::abs(alpha * freq_response(p, om)));

    const Plant s = time_scale(p, gamma);
    CHECK(phase(s, om / gamma) == doctest::Approx(phase(p, om)).epsilon(1e-13));
    CHECK(magnitude(s, om / gamma) ==
          doctest::Approx(std::pow(gamma, p.integrators()) * magnitude(p, om)).epsilon(1e-12));
  }

  const Plant p = soiptd<double>({1.0, 0.1, 0.7042, 0.06});
  CHECK(time_scale(p, 1.0) == p);
  const auto q = soiptd_params(time_scale(p, 2.0));
  CHECK(q.Tp == doctest::Approx(0.2));
  CHECK(q.Td == doctest::Approx(1.4084));
  CHECK(q.tau == doctest::Approx(0.12));
  const Plant a = time_scale(time_scale(p, 1.7), 0.3);
  const Plant b = time_scale(p, 1.7 * 0.3);
  CHECK(a.gain() == b.gain());
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.denominator_time_constants()[k] ==
          doctest::Approx(b.denominator_time_constants()[k]).epsilon(1e-15));
  }
  CHECK(a.delay() == doctest::Approx(b.delay()).epsilon(1e-15));
  CHECK_THROWS_AS(time_scale(p, 0.0), Error);
  CHECK_THROWS_AS(gain_scale(p, 0.0), Error);
}

TEST_CASE("attitude parameter map") {
  const Plant p = attitude_plant<double>({1.0, 1.42, 0.14, 0.1, 0.06, 0.0});
  const auto q = soiptd_params(p);
  CHECK(q.Td == doctest::Approx(0.7042).epsilon(1e-4));
  CHECK(q.tau == 0.06);
  CHECK(q.K == doctest::Approx(0.14));

  // Same dynamics as the state-space model up to a gain; phase is identical.
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  oracle::attitude_state_space(A, B, C);
  std::mt19937_64 rng(22);
  for (int i = 0; i < 20; ++i) {
    const double om = log_uniform(rng, 0.1, 100.0);
    const auto ref = oracle::state_space_response(A, B, C, 0.06, om);
    const auto got = freq_response(p, om);
    CHECK(std::abs(std::arg(got / ref)) < 1e-12);
    CHECK(std::abs(got) / std::abs(ref) == doctest::Approx(1.0 / 1.42).epsilon(1e-12));
  }

  CHECK(soiptd_params(attitude_plant<double>({2.0, 1.0, 1.0, 0.1, 0.02, 0.03})).Td == 2.0);
  CHECK(soiptd_params(attitude_plant<double>({2.0, 1.0, 1.0, 0.1, 0.02, 0.03})).tau ==
        doctest::Approx(0.05));
  try {
    attitude_plant<double>({1.0, 0.0, 1.0, 0.1, 0.02, 0.0});
    FAIL("expected DegenerateDrag");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDrag);
  }
}

TEST_CASE("altitude parameter map") {
  const auto q = soiptd_params(altitude_plant<double>({1.0, 1.0, 6.0, 1.0, 0.05, 0.02, 0.03}));
  CHECK(q.Td == 1.0);
  CHECK(q.tau == doctest::Approx(0.05));
  CHECK(q.K == 6.0);
  CHECK(soiptd_params(altitude_plant<double>({1.0, 1.0, 4.0, 0.5, 0.05, 0.02, 0.0})).Td == 2.0);

  const auto base = soiptd_params(altitude_plant<double>({1.2, 3.0, 4.0, 0.4, 0.05, 0.02, 0.01}));
  const auto more = soiptd_params(altitude_plant<double>({1.2, 3.0, 4.0, 0.4, 0.05, 0.02, 0.03}));
  CHECK(more.tau - base.tau == doctest::Approx(0.02).epsilon(1e-12));
  try {
    altitude_plant<double>({1.0, 1.0, 4.0, 0.0, 0.05, 0.02, 0.0});
    FAIL("expected DegenerateDrag");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDrag);
  }
}

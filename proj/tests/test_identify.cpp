#include <cmath>

#include "doctest.h"
#include "mrftid/identify.hpp"
#include "mrftid/lprs.hpp"
#include "support.hpp"

using namespace mrftid;
using support::rel;

namespace {

struct Fixture {
  Manifold m4 = support::cached_manifold(-0.4);
  Manifold m7 = support::cached_manifold(-0.7);
  LimitCycle c4 = solve_limit_cycle(support::attitude_example(), {-0.4, 1.0});
  LimitCycle c7 = solve_limit_cycle(support::attitude_example(), {-0.7, 1.0});

  [[nodiscard]] std::array<TestObservation, 2> exact() const {
    return {TestObservation{-0.4, 1.0, c4.frequency_hz, c4.amplitude},
            TestObservation{-0.7, 1.0, c7.frequency_hz, c7.amplitude}};
  }
  [[nodiscard]] std::array<const Manifold*, 2> pair() const { return {&m4, &m7}; }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

PriorKnowledge prior(double tp = support::kTp) {
  PriorKnowledge p;
  p.tp = tp;
  p.gain = support::kGain;
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("two frequencies of the attitude example") {
  const auto& f = fx();
  const std::array obs{TestObservation{-0.4, 1.0, 0.708, {}}, TestObservation{-0.7, 1.0, 1.022, {}}};
  const auto r = identify_two_freq(obs, prior(), f.pair());
  CHECK(r.method == "two_frequency");
  CHECK(rel(r.td, support::kTd) < 0.05);
  CHECK(rel(r.tau, support::kTau) < 0.03);
  REQUIRE(r.residual_hz.size() == 2);
  CHECK(r.residual_hz[0] < 1e-6 * 0.708);

  const auto exact = identify_two_freq(f.exact(), prior(), f.pair());
  CHECK(rel(exact.td, support::kTd) < 1e-5);
  CHECK(rel(exact.tau, support::kTau) < 1e-5);

  IdentOptions coarse;
  coarse.refine = false;
  const auto grid = identify_two_freq(f.exact(), prior(), f.pair(), coarse);
  CHECK(rel(grid.td, support::kTd) < 0.05);
  CHECK(rel(grid.tau, support::kTau) < 0.03);
}

TEST_CASE("identification is equivariant under time scaling") {
  const auto& f = fx();
  const double gamma = 1.5;
  auto obs = f.exact();
  for (auto& o : obs) o.omega_hz /= gamma;
  const auto base = identify_two_freq(f.exact(), prior(), f.pair());
  const auto scaled = identify_two_freq(obs, prior(support::kTp * gamma), f.pair());
  CHECK(rel(scaled.td, gamma * base.td) < 1e-6);
  CHECK(rel(scaled.tau, gamma * base.tau) < 1e-6);
}

TEST_CASE("inconsistent or excluded observations are rejected") {
  const auto& f = fx();
  // frequencies swapped between the two beta values
  const std::array swapped{TestObservation{-0.4, 1.0, 1.022, {}}, TestObservation{-0.7, 1.0, 0.708, {}}};
  const auto code = code_of([&] { identify_two_freq(swapped, prior(), f.pair()); });
  CHECK((code == ErrorCode::NoIntersection || code == ErrorCode::NoFeasibleEstimate));

  PriorKnowledge narrow = prior();
  narrow.td_hi = 0.5;
  CHECK(code_of([&] { identify_two_freq(f.exact(), narrow, f.pair()); }) ==
        ErrorCode::NoFeasibleEstimate);

  PriorKnowledge wide = prior();
  wide.td_lo = 0.3;
  wide.td_hi = 2.0;
  wide.tau_hi = 0.1;
  const auto r = identify_two_freq(f.exact(), wide, f.pair());
  CHECK(wide.admits(r.td, r.tau));

  CHECK(code_of([&] {
          identify_two_freq(f.exact(), prior(), {&f.m7, &f.m4});
        }) == ErrorCode::InvalidParameter);
  auto bad = f.exact();
  bad[0].omega_hz = 0.0;
  CHECK(code_of([&] { identify_two_freq(bad, prior(), f.pair()); }) == ErrorCode::InvalidFrequency);
  CHECK(code_of([&] { identify_two_freq(f.exact(), prior(0.001), f.pair()); }) ==
        ErrorCode::OutOfGridRange);
}

TEST_CASE("single test with known gain") {
  const auto& f = fx();
  const auto obs = f.exact()[1];
  const auto r = identify_single_test(obs, prior(), f.m7);
  CHECK(r.method == "single_test");
  CHECK(rel(r.td, support::kTd) < 0.05);
  CHECK(rel(r.tau, support::kTau) < 0.03);

  auto zero = obs;
  zero.amplitude = 0.0;
  CHECK(code_of([&] { identify_single_test(zero, prior(), f.m7); }) == ErrorCode::NoAmplitudeMatch);
  auto huge = obs;
  huge.amplitude = 100 * *obs.amplitude;
  CHECK(code_of([&] { identify_single_test(huge, prior(), f.m7); }) == ErrorCode::NoAmplitudeMatch);
}

TEST_CASE("Monte Carlo bookkeeping") {
  const auto& f = fx();
  MonteCarloOptions mc;
  mc.draws = 40;
  mc.seed = 7;
  mc.sigma_rel = 0.0;
  const auto point = identify_two_freq(f.exact(), prior(), f.pair());
  const auto flat = monte_carlo_two_freq(f.exact(), prior(), f.pair(), mc);
  REQUIRE(flat.stats);
  CHECK(flat.stats->td.std == 0.0);
  CHECK(flat.stats->tau.std == 0.0);
  CHECK(flat.stats->td.mean == point.td);
  CHECK(flat.stats->tau.mean == point.tau);
  CHECK(flat.td == point.td);

  mc.sigma_rel = 0.03;
  mc.threads = 1;
  const auto a = monte_carlo_two_freq(f.exact(), prior(), f.pair(), mc);
  mc.threads = 3;
  const auto b = monte_carlo_two_freq(f.exact(), prior(), f.pair(), mc);
  REQUIRE(a.stats);
  REQUIRE(b.stats);
  CHECK(a.stats->td_samples == b.stats->td_samples);
  CHECK(a.stats->tau_samples == b.stats->tau_samples);
  CHECK(a.stats->failures == b.stats->failures);
  CHECK(a.stats->draws == 40);
  CHECK(a.stats->td_samples.size() + static_cast<std::size_t>(a.stats->failures) == 40);
  CHECK(a.stats->td.std > 0.0);

  mc.seed = 8;
  const auto c = monte_carlo_two_freq(f.exact(), prior(), f.pair(), mc);
  CHECK(c.stats->td_samples != a.stats->td_samples);

  mc.sigma_rel = 0.0;
  const auto single = monte_carlo_single_test(f.exact()[1], prior(), f.m7, mc);
  CHECK(single.stats->td.std == 0.0);

  mc.draws = 1;
  CHECK(code_of([&] { monte_carlo_two_freq(f.exact(), prior(), f.pair(), mc); }) ==
        ErrorCode::InvalidParameter);
}

TEST_CASE("summary statistics") {
  const auto same = summarize({0.1, 0.1, 0.1, 0.1});
  CHECK(same.mean == 0.1);
  CHECK(same.std == 0.0);
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

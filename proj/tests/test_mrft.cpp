#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mrftid/lprs.hpp"
#include "mrftid/mrft.hpp"
#include "mrftid/signal_log.hpp"
#include "support.hpp"

using namespace mrftid;
using support::log_uniform;
using support::rel;
using support::uniform;

namespace {

Plant random_soiptd(std::mt19937_64& rng) {
  return soiptd<double>({log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.01, 0.3),
                         log_uniform(rng, 0.2, 5.0), uniform(rng, 0.02, 0.15)});
}

LimitCycle run(const Plant& p, const MrftConfig& cfg, double dt_scale = 1.0) {
  return detect_limit_cycle(
      simulate_mrft(p, cfg, default_dt(p) * dt_scale, suggested_duration(p, cfg)), cfg);
}

MrftState state(double u, double e_max, double e_min) {
  MrftState s;
  s.u = u;
  s.e_max = e_max;
  s.e_min = e_min;
  return s;
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

TEST_CASE("relay with beta = 0 is an ideal relay with hold") {
  const MrftConfig cfg{0.0, 2.0};
  MrftState s = initial_state(cfg);
  CHECK(s.u == 2.0);
  auto step = mrft_update(s, cfg, 0.5);
  CHECK(step.u == 2.0);
  CHECK_FALSE(step.switched);
  step = mrft_update(step.state, cfg, 0.0);
  CHECK(step.u == 2.0);
  step = mrft_update(step.state, cfg, -0.1);
  CHECK(step.u == -2.0);
  CHECK(step.switched);
  step = mrft_update(step.state, cfg, 0.0);
  CHECK(step.u == -2.0);
  step = mrft_update(step.state, cfg, -0.3);
  CHECK(step.u == -2.0);
  step = mrft_update(step.state, cfg, 0.1);
  CHECK(step.u == 2.0);
}

TEST_CASE("relay thresholds follow the recorded peaks") {
  const MrftConfig cfg{-0.5, 1.0};

  // from -h: b1 = -beta e_min = -0.5 and e = -0.5 satisfies e >= b1
  auto up = mrft_update(state(-1.0, 1.0, -1.0), cfg, -0.5);
  CHECK(up.u == 1.0);
  CHECK(up.switched);
  CHECK(up.threshold == doctest::Approx(-0.5));

  // from +h: -b2 = -beta e_max = 0.5; 0.6 holds, 0.3 switches
  auto hold = mrft_update(state(1.0, 1.0, -1.0), cfg, 0.6);
  CHECK(hold.u == 1.0);
  CHECK_FALSE(hold.switched);
  auto down = mrft_update(hold.state, cfg, 0.3);
  CHECK(down.u == -1.0);
  CHECK(down.threshold == doctest::Approx(0.5));

  // peaks restart at the switch
  CHECK(down.state.e_max == doctest::Approx(0.3));
  CHECK(down.state.e_min == 0.0);
}

TEST_CASE("no immediate switch back after a switch with beta < 0") {
  const MrftConfig cfg{-0.7, 1.0};
  auto s = mrft_update(state(-1.0, 0.2, -1.0), cfg, -0.6);
  REQUIRE(s.u == 1.0);
  // e = -0.6 <= -beta * e_max = 0 would fire again; the relay must first leave that region
  s = mrft_update(s.state, cfg, -0.55);
  CHECK(s.u == 1.0);
  s = mrft_update(s.state, cfg, 0.4);
  CHECK(s.u == 1.0);
  s = mrft_update(s.state, cfg, 0.27);
  CHECK(s.u == -1.0);
}

TEST_CASE("attitude example oscillates at the reported frequencies") {
  const Plant p = support::attitude_example();
  const auto c7 = run(p, {-0.7, 1.0});
  const auto c4 = run(p, {-0.4, 1.0});
  CHECK(rel(c7.frequency_hz, 1.022) < 0.01);
  CHECK(rel(c4.frequency_hz, 0.708) < 0.01);

  const auto e7 = solve_limit_cycle(p, {-0.7, 1.0});
  CHECK(rel(c7.frequency_hz, e7.frequency_hz) < 0.005);
  CHECK(rel(c7.amplitude, e7.amplitude) < 0.005);

  const auto g = run(gain_scale(p, 10.0), {-0.7, 1.0});
  CHECK(rel(g.frequency_hz, 1.022) < 0.01);
  CHECK(rel(g.amplitude, 10 * c7.amplitude) < 0.02);
}

TEST_CASE("simulation matches the exact solution on random plants") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const Plant p = random_soiptd(rng);
    for (double beta : {-0.8, -0.7, -0.5, -0.4}) {
      const MrftConfig cfg{beta, 1.0};
      const auto sim = run(p, cfg);
      const auto exact = solve_limit_cycle(p, cfg);
      CHECK(rel(sim.frequency_hz, exact.frequency_hz) < 0.005);
      CHECK(rel(sim.amplitude, exact.amplitude) < 0.02);
    }
  }
}

TEST_CASE("simulated cycles are homogeneous in gain, relay amplitude and time") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Plant p = random_soiptd(rng);
    const MrftConfig cfg{uniform(rng, -0.8, -0.3), 1.0};
    const auto base = run(p, cfg);
    for (double alpha : {0.5, 2.0, 10.0}) {
      const auto g = run(gain_scale(p, alpha), cfg);
      CHECK(rel(g.frequency_hz, base.frequency_hz) < 0.01);
      CHECK(rel(g.amplitude, alpha * base.amplitude) < 0.02);
    }
    const auto h = run(p, {cfg.beta, 3.0});
    CHECK(rel(h.frequency_hz, base.frequency_hz) < 0.01);
    CHECK(rel(h.amplitude, 3 * base.amplitude) < 0.02);
    const double gamma = log_uniform(rng, 0.3, 3.0);
    const auto t = run(time_scale(p, gamma), cfg);
    CHECK(rel(t.frequency_hz * gamma, base.frequency_hz) < 0.01);
    CHECK(rel(t.amplitude, gamma * base.amplitude) < 0.02);
  }
}

TEST_CASE("halving the step barely moves the frequency") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 5; ++i) {
    const Plant p = random_soiptd(rng);
    const MrftConfig cfg{-0.6, 1.0};
    CHECK(rel(run(p, cfg, 0.5).frequency_hz, run(p, cfg).frequency_hz) < 0.001);
  }
}

TEST_CASE("relay output alternates strictly in simulated logs") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 10; ++i) {
    const Plant p = random_soiptd(rng);
    const MrftConfig cfg{uniform(rng, -0.9, 0.5), log_uniform(rng, 0.1, 10.0)};
    const auto log = simulate_mrft(p, cfg, default_dt(p), suggested_duration(p, cfg));
    int switches = 0, bad = 0;
    for (std::size_t k = 0; k < log.size(); ++k) {
      if (std::abs(std::abs(log.u[k]) - cfg.h) > 1e-12 * cfg.h) ++bad;
      if (k > 0 && log.u[k] != log.u[k - 1]) {
        if (log.u[k] != -log.u[k - 1]) ++bad;
        ++switches;
      }
    }
    CHECK(bad == 0);
    CHECK(switches > 20);
  }
}

TEST_CASE("detection on a synthetic square wave") {
  SignalLog log;
  log.dt = 1e-3;
  for (int k = 0; k < 20000; ++k) {
    const double t = k * log.dt;
    const double e = std::sin(2 * std::numbers::pi * (t + 0.1234));
    log.t.push_back(t);
    log.e.push_back(e);
    log.y.push_back(-e);
  }
  double u = 1.0;
  for (double e : log.e) {
    if (e > 0) u = 1.0;
    if (e < 0) u = -1.0;
    log.u.push_back(u);
  }
  const auto lc = detect_limit_cycle(log, {0.0, 1.0});
  CHECK(lc.frequency_hz == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lc.amplitude == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(lc.steady_cycles >= 5);
}

TEST_CASE("detection errors") {
  const Plant p = support::attitude_example();
  const MrftConfig cfg{-0.7, 1.0};
  CHECK(code_of([&] { detect_limit_cycle(simulate_mrft(p, cfg, 1e-3, 2.0), cfg); }) ==
        ErrorCode::NotConverged);

  SignalLog flat;
  flat.dt = 0.01;
  for (int k = 0; k < 500; ++k) {
    flat.t.push_back(k * 0.01);
    flat.e.push_back(-1.0);
    flat.u.push_back(-1.0);
  }
  CHECK(code_of([&] { detect_limit_cycle(flat, cfg); }) == ErrorCode::NoOscillation);

  SimOptions opts;
  opts.divergence_bound = 10.0;
  const Plant unstable = gain_scale(p, -1.0);
  CHECK(code_of([&] { simulate_mrft(unstable, cfg, 1e-3, 1000.0, initial_state(cfg), opts); }) ==
        ErrorCode::Diverged);
  CHECK_THROWS_AS(simulate_mrft(p, cfg, -1.0, 10.0), Error);
}

TEST_CASE("signal log CSV") {
  const Plant p = support::attitude_example();
  const MrftConfig cfg{-0.4, 1.0};
  const auto log = simulate_mrft(p, cfg, 2e-3, 5.0);
  std::stringstream buf;
  write_log(buf, log);
  const auto back = ingest_log(buf);
  CHECK(back.size() == log.size());
  CHECK(back.has_output());
  CHECK(back.dt == doctest::Approx(log.dt));
  CHECK(back.e == log.e);
  CHECK(back.u == log.u);

  std::istringstream three("# comment\nt,e,u\n0,0.1,1\n0.1,0.2,1\n0.2,-0.1,-1\n");
  const auto l3 = ingest_log(three);
  CHECK(l3.size() == 3);
  CHECK_FALSE(l3.has_output());

  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    return code_of([&] { ingest_log(in); });
  };
  CHECK(error_of("t,e,u\n0,0,1\n0.2,0,1\n0.1,0,-1\n") == ErrorCode::SamplingError);
  CHECK(error_of("t,e,u\n0,0,1\n0.1,0,1\n0.3,0,-1\n") == ErrorCode::SamplingError);
  CHECK(error_of("t,e,u\n0,0,1\n0.1,0,0\n0.2,0,-1\n") == ErrorCode::FormatError);
  CHECK(error_of("t,e\n0,0\n0.1,0\n") == ErrorCode::FormatError);
  CHECK(error_of("t,e,u\n0,x,1\n") == ErrorCode::FormatError);
  CHECK(error_of("t,e,u\n0,0,1\n0.1,0,-2\n") == ErrorCode::FormatError);
}

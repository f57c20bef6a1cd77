#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrftid/manifold.hpp"

namespace mrftid {

/// One MRFT experiment as measured.
struct TestObservation {
  double beta = 0.0;
  double h = 1.0;
  double omega_hz = 0.0;
  std::optional<double> amplitude;

  void validate() const;
};

struct PriorKnowledge {
  /// Known propulsion time constant.
  double tp = 0.0;
  double td_lo = 0.0;
  double td_hi = std::numeric_limits<double>::infinity();
  double tau_lo = 0.0;
  double tau_hi = std::numeric_limits<double>::infinity();
  /// Static gain K of the plant, needed only by the amplitude-based identification.
  double gain = 1.0;

  void validate() const;
  [[nodiscard]] bool admits(double td, double tau) const {
    return td >= td_lo && td <= td_hi && tau >= tau_lo && tau <= tau_hi;
  }
};

struct Candidate {
  double td = 0.0;
  double tau = 0.0;
  /// |LPRS frequency of the candidate plant - measured frequency| per test [Hz].
  std::vector<double> residual_hz;
  double combined_residual = 0.0;
  bool within_bounds = false;
};

struct ParamStats {
  double mean = 0.0;
  double std = 0.0;
};

struct MonteCarloStats {
  int draws = 0;
  int failures = 0;
  double failure_rate = 0.0;
  std::map<std::string, int> failure_reasons;
  ParamStats td;
  ParamStats tau;
  /// Estimates of the successful draws in draw order.
  std::vector<double> td_samples;
  std::vector<double> tau_samples;
};

struct IdentResult {
  std::string method;
  double td = 0.0;
  double tau = 0.0;
  std::vector<double> residual_hz;
  std::vector<Candidate> candidates;
  std::optional<MonteCarloStats> stats;
};

struct IdentOptions {
  /// Replace the interpolated intersection by an exact root of the cell solve.
  bool refine = true;
  double refine_rel_tol = 1e-10;
  /// Candidates whose frequency residual exceeds this fraction of the measured
  /// frequency are rejected.
  double max_residual_rel = 0.01;
  LprsOptions lprs{};
};

/// Intersection of the two scaled UFM slices at the known T_p. manifolds[i] must have the
/// beta of obs[i].
IdentResult identify_two_freq(const std::array<TestObservation, 2>& obs,
                              const PriorKnowledge& prior,
                              const std::array<const Manifold*, 2>& manifolds,
                              const IdentOptions& options = {});

/// Single test: the scaled UFM slice is searched for the T_d whose UGM amplitude,
/// scaled by h and the known gain, equals the measured amplitude.
IdentResult identify_single_test(const TestObservation& obs, const PriorKnowledge& prior,
                                 const Manifold& manifold, const IdentOptions& options = {});

struct MonteCarloOptions {
  double sigma_rel = 0.03;
  int draws = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Repeats identification under multiplicative Gaussian noise (1 + sigma xi) on every
/// observed frequency and amplitude. Draw i uses its own generator seeded from (seed, i),
/// so results do not depend on the thread count.
IdentResult monte_carlo_two_freq(const std::array<TestObservation, 2>& base,
                                 const PriorKnowledge& prior,
                                 const std::array<const Manifold*, 2>& manifolds,
                                 const MonteCarloOptions& mc, const IdentOptions& options = {});

IdentResult monte_carlo_single_test(const TestObservation& base, const PriorKnowledge& prior,
                                    const Manifold& manifold, const MonteCarloOptions& mc,
                                    const IdentOptions& options = {});

/// Mean and sample standard deviation; exactly zero spread for identical values.
ParamStats summarize(const std::vector<double>& values);

}  // namespace mrftid

#include "mrftid/identify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mrftid/parallel.hpp"

namespace mrftid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void check_manifold(const Manifold& man, const TestObservation& obs) {
  if (std::abs(man.beta - obs.beta) > 1e-12) {
    throw Error(ErrorCode::InvalidParameter, "manifold beta " + fmt(man.beta) +
                                                 " does not match test beta " + fmt(obs.beta));
  }
}

ManifoldTolerances cell_tolerances(const IdentOptions& options) {
  ManifoldTolerances tol;
  tol.verify = false;
  tol.lprs = options.lprs;
  return tol;
}

// Exact UFM point at the measured scale: the cell solve at (tp, td) / gamma, scaled back.
CellSolution exact_cell(double beta, double gamma, double tp, double td,
                        const ManifoldTolerances& tol) {
  CellSolution cell = solve_unit_cell(beta, tp / gamma, td / gamma, tol);
  if (!cell.feasible) return cell;
  cell.tau *= gamma;
  return cell;
}

// Root of f in log(td) between a and b; f(a), f(b) finite with opposite signs.
template <typename F>
double bisect_log(F&& f, double a, double b, double fa, double rel_tol) {
  for (int it = 0; it < 200 && std::abs(b - a) > rel_tol * std::min(a, b); ++it) {
    const double mid = std::sqrt(a * b);
    const double fm = f(mid);
    if (!std::isfinite(fm)) break;
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return std::sqrt(a * b);
}

// Linear zero of a sampled function between nodes, in log(td).
double linear_root(double a, double b, double fa, double fb) {
  const double w = fa / (fa - fb);
  return std::exp(std::log(a) + w * (std::log(b) - std::log(a)));
}

struct Bracket {
  std::size_t index;
  double a;
  double b;
  double fa;
  double fb;
};

std::vector<Bracket> sign_changes(const std::vector<double>& nodes,
                                  const std::vector<double>& values) {
  std::vector<Bracket> out;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double fa = values[k];
    const double fb = values[k + 1];
    if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
    if (fa == 0.0) {
      out.push_back({k, nodes[k], nodes[k], 0.0, 0.0});
    } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      out.push_back({k, nodes[k], nodes[k + 1], fa, fb});
    }
  }
  if (!nodes.empty() && values.back() == 0.0) {
    out.push_back({nodes.size() - 1, nodes.back(), nodes.back(), 0.0, 0.0});
  }
  return out;
}

// The exact function can cross a node or two away from the interpolated crossing where the
// curves are nearly parallel, so a few neighbouring nodes are searched as well.
template <typename F>
std::optional<double> refine_root(F&& f, const std::vector<double>& nodes, std::size_t index,
                                  double estimate, double rel_tol) {
  constexpr std::size_t kReach = 3;
  const std::size_t first = index >= kReach ? index - kReach : 0;
  const std::size_t last = std::min(nodes.size() - 1, index + kReach + 1);
  std::vector<double> values;
  for (std::size_t k = first; k <= last; ++k) values.push_back(f(nodes[k]));
  std::optional<double> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double fa = values[k];
    const double fb = values[k + 1];
    if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
    const double a = nodes[first + k];
    const double b = nodes[first + k + 1];
    std::optional<double> root;
    if (fa == 0.0) {
      root = a;
    } else if (fb == 0.0) {
      root = b;
    } else if ((fa < 0.0) != (fb < 0.0)) {
      root = bisect_log(f, a, b, fa, rel_tol);
    }
    if (!root) continue;
    const double distance = std::abs(std::log(*root / estimate));
    if (distance < best_distance) {
      best_distance = distance;
      best = root;
    }
  }
  return best;
}

void score(Candidate& c, const std::vector<const TestObservation*>& tests,
           const PriorKnowledge& prior, const IdentOptions& options) {
  c.within_bounds = prior.admits(c.td, c.tau);
  c.residual_hz.clear();
  c.combined_residual = 0.0;
  for (const TestObservation* t : tests) {
    double r = std::numeric_limits<double>::infinity();
    if (c.tau >= 0.0) {
      try {
        r = std::abs(solve_limit_cycle(soiptd<double>({prior.gain, prior.tp, c.td, c.tau}),
                                       {t->beta, t->h}, options.lprs)
                         .frequency_hz -
                     t->omega_hz);
      } catch (const Error&) {
      }
    }
    c.residual_hz.push_back(r);
    c.combined_residual += r;
  }
}

bool residual_ok(const Candidate& c, const std::vector<const TestObservation*>& tests,
                 const IdentOptions& options) {
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!(c.residual_hz[i] <= options.max_residual_rel * tests[i]->omega_hz)) return false;
  }
  return true;
}

IdentResult select(std::string method, std::vector<Candidate> candidates,
                   const std::vector<const TestObservation*>& tests, const IdentOptions& options) {
  const Candidate* best = nullptr;
  bool any_in_bounds = false;
  for (const auto& c : candidates) {
    if (!c.within_bounds) continue;
    any_in_bounds = true;
    if (!residual_ok(c, tests, options)) continue;
    if (!best || c.combined_residual < best->combined_residual) best = &c;
  }
  if (!best) {
    throw Error(ErrorCode::NoFeasibleEstimate,
                any_in_bounds ? std::to_string(candidates.size()) +
                                    " candidate(s) rejected by the LPRS frequency residual"
                              : std::to_string(candidates.size()) +
                                    " candidate(s), none within the prior bounds");
  }
  IdentResult r;
  r.method = std::move(method);
  r.td = best->td;
  r.tau = best->tau;
  r.residual_hz = best->residual_hz;
  r.candidates = std::move(candidates);
  return r;
}

std::mt19937_64 draw_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double perturb(double value, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return value * (1.0 + sigma * normal(rng));
}

template <typename Draw>
IdentResult run_monte_carlo(IdentResult point, const MonteCarloOptions& mc, Draw&& draw) {
  if (mc.draws < 2) throw Error(ErrorCode::InvalidParameter, "Monte Carlo needs at least 2 draws");
  if (!std::isfinite(mc.sigma_rel) || mc.sigma_rel < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "sigma_rel must be non-negative");
  }
  const auto n = static_cast<std::size_t>(mc.draws);
  std::vector<double> td(n, kNaN);
  std::vector<double> tau(n, kNaN);
  std::vector<std::string> reason(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto rng = draw_rng(mc.seed, i);
        try {
          const IdentResult r = draw(rng);
          td[i] = r.td;
          tau[i] = r.tau;
        } catch (const Error& e) {
          reason[i] = std::string(error_name(e.code()));
        }
      },
      mc.threads);

  MonteCarloStats stats;
  stats.draws = mc.draws;
  for (std::size_t i = 0; i < n; ++i) {
    if (!reason[i].empty()) {
      ++stats.failures;
      ++stats.failure_reasons[reason[i]];
      continue;
    }
    stats.td_samples.push_back(td[i]);
    stats.tau_samples.push_back(tau[i]);
  }
  stats.failure_rate = static_cast<double>(stats.failures) / static_cast<double>(n);
  if (2 * stats.failures > mc.draws || stats.td_samples.size() < 2) {
    throw Error(ErrorCode::UnreliableStatistics,
                std::to_string(stats.failures) + " of " + std::to_string(mc.draws) +
                    " draws failed");
  }
  stats.td = summarize(stats.td_samples);
  stats.tau = summarize(stats.tau_samples);
  point.stats = std::move(stats);
  return point;
}

}  // namespace

void TestObservation::validate() const {
  MrftConfig{beta, h}.validate();
  if (!std::isfinite(omega_hz) || !(omega_hz > 0.0)) {
    throw Error(ErrorCode::InvalidFrequency, "measured frequency must be positive");
  }
}

void PriorKnowledge::validate() const {
  if (!std::isfinite(tp) || !(tp > 0.0)) throw Error(ErrorCode::InvalidParameter, "T_p must be positive");
  if (!(td_lo < td_hi) || !(tau_lo < tau_hi)) {
    throw Error(ErrorCode::InvalidParameter, "prior bounds must satisfy lo < hi");
  }
  if (!std::isfinite(gain) || gain == 0.0) throw Error(ErrorCode::InvalidParameter, "gain must be nonzero");
}

ParamStats summarize(const std::vector<double>& values) {
  ParamStats s;
  if (values.empty()) return s;
  // Shifted by the first value so identical inputs give an exact mean and zero spread.
  const double origin = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - origin;
  s.mean = origin + acc / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return s;
}

IdentResult identify_two_freq(const std::array<TestObservation, 2>& obs,
                              const PriorKnowledge& prior,
                              const std::array<const Manifold*, 2>& manifolds,
                              const IdentOptions& options) {
  obs[0].validate();
  obs[1].validate();
  prior.validate();
  if (!manifolds[0] || !manifolds[1]) throw Error(ErrorCode::InvalidParameter, "missing manifold");
  if (obs[0].beta == obs[1].beta) {
    throw Error(ErrorCode::InvalidParameter, "the two tests need different beta");
  }
  check_manifold(*manifolds[0], obs[0]);
  check_manifold(*manifolds[1], obs[1]);

  std::array<ScaledManifold, 2> scaled{scale_manifold(*manifolds[0], obs[0].omega_hz),
                                       scale_manifold(*manifolds[1], obs[1].omega_hz)};
  std::array<SliceCurve, 2> slice{slice_at_tp(scaled[0], prior.tp),
                                  slice_at_tp(scaled[1], prior.tp)};

  // Both curves on the union of their T_d nodes inside the common range.
  const double lo = std::max(slice[0].td.front(), slice[1].td.front());
  const double hi = std::min(slice[0].td.back(), slice[1].td.back());
  std::vector<double> nodes;
  for (const auto& s : slice) {
    for (double x : s.td) {
      if (x >= lo && x <= hi) nodes.push_back(x);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> diff(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    diff[k] = slice[0].tau_at(nodes[k]) - slice[1].tau_at(nodes[k]);
  }

  const auto brackets = sign_changes(nodes, diff);
  if (brackets.empty()) {
    double closest = std::numeric_limits<double>::infinity();
    double where = kNaN;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (std::isfinite(diff[k]) && std::abs(diff[k]) < closest) {
        closest = std::abs(diff[k]);
        where = nodes[k];
      }
    }
    throw Error(ErrorCode::NoIntersection,
                std::isfinite(closest)
                    ? "closest approach |tau1 - tau2| = " + fmt(closest) + " s at T_d = " + fmt(where) + " s"
                    : std::string("slices have no feasible overlap"));
  }

  const ManifoldTolerances tol = cell_tolerances(options);
  auto exact_diff = [&](double td) {
    const CellSolution a = exact_cell(obs[0].beta, scaled[0].gamma, prior.tp, td, tol);
    const CellSolution b = exact_cell(obs[1].beta, scaled[1].gamma, prior.tp, td, tol);
    return (a.feasible && b.feasible) ? a.tau - b.tau : kNaN;
  };

  std::vector<Candidate> candidates;
  for (const auto& br : brackets) {
    Candidate c;
    c.td = br.a == br.b ? br.a : linear_root(br.a, br.b, br.fa, br.fb);
    c.tau = 0.5 * (slice[0].tau_at(c.td) + slice[1].tau_at(c.td));
    if (options.refine) {
      if (const auto root = refine_root(exact_diff, nodes, br.index, c.td, options.refine_rel_tol)) {
        c.td = *root;
      }
      const CellSolution a = exact_cell(obs[0].beta, scaled[0].gamma, prior.tp, c.td, tol);
      const CellSolution b = exact_cell(obs[1].beta, scaled[1].gamma, prior.tp, c.td, tol);
      if (a.feasible && b.feasible) c.tau = 0.5 * (a.tau + b.tau);
    }
    candidates.push_back(c);
  }
  const std::vector<const TestObservation*> tests{&obs[0], &obs[1]};
  for (auto& c : candidates) score(c, tests, prior, options);
  return select("two_frequency", std::move(candidates), tests, options);
}

IdentResult identify_single_test(const TestObservation& obs, const PriorKnowledge& prior,
                                 const Manifold& manifold, const IdentOptions& options) {
  obs.validate();
  prior.validate();
  check_manifold(manifold, obs);
  if (!obs.amplitude || !std::isfinite(*obs.amplitude) || !(*obs.amplitude > 0.0)) {
    throw Error(ErrorCode::NoAmplitudeMatch, "test has no positive amplitude");
  }
  const double measured = *obs.amplitude;
  const ScaledManifold scaled = scale_manifold(manifold, obs.omega_hz);
  const SliceCurve slice = slice_at_tp(scaled, prior.tp);

  // The scaled UFM point has static gain K0 = gain * T_d preserved by time scaling, i.e. an
  // Eq.-form gain of gain / gamma; a plant with gain K is K * gamma / gain times larger.
  const double factor = obs.h * prior.gain * scaled.gamma / manifold.gain;
  std::vector<double> mismatch(slice.td.size());
  for (std::size_t k = 0; k < slice.td.size(); ++k) mismatch[k] = factor * slice.amp[k] - measured;

  const auto brackets = sign_changes(slice.td, mismatch);
  if (brackets.empty()) {
    double a_lo = std::numeric_limits<double>::infinity();
    double a_hi = -a_lo;
    for (double a : slice.amp) {
      if (std::isfinite(a)) {
        a_lo = std::min(a_lo, factor * a);
        a_hi = std::max(a_hi, factor * a);
      }
    }
    throw Error(ErrorCode::NoAmplitudeMatch, "measured amplitude " + fmt(measured) +
                                                 " outside slice range [" + fmt(a_lo) + ", " +
                                                 fmt(a_hi) + "]");
  }

  const ManifoldTolerances tol = cell_tolerances(options);
  const double gamma = scaled.gamma;
  const double cell_factor = factor * std::pow(gamma, manifold.integrators);
  auto exact_mismatch = [&](double td) {
    const CellSolution c = exact_cell(obs.beta, gamma, prior.tp, td, tol);
    return c.feasible ? cell_factor * c.amplitude - measured : kNaN;
  };

  std::vector<Candidate> candidates;
  for (const auto& br : brackets) {
    Candidate c;
    c.td = br.a == br.b ? br.a : linear_root(br.a, br.b, br.fa, br.fb);
    c.tau = slice.tau_at(c.td);
    if (options.refine) {
      if (const auto root =
              refine_root(exact_mismatch, slice.td, br.index, c.td, options.refine_rel_tol)) {
        c.td = *root;
      }
      const CellSolution cell = exact_cell(obs.beta, gamma, prior.tp, c.td, tol);
      if (cell.feasible) c.tau = cell.tau;
    }
    candidates.push_back(c);
  }
  const std::vector<const TestObservation*> tests{&obs};
  for (auto& c : candidates) score(c, tests, prior, options);
  return select("single_test", std::move(candidates), tests, options);
}

IdentResult monte_carlo_two_freq(const std::array<TestObservation, 2>& base,
                                 const PriorKnowledge& prior,
                                 const std::array<const Manifold*, 2>& manifolds,
                                 const MonteCarloOptions& mc, const IdentOptions& options) {
  IdentResult point = identify_two_freq(base, prior, manifolds, options);
  return run_monte_carlo(std::move(point), mc, [&](std::mt19937_64& rng) {
    std::array<TestObservation, 2> noisy = base;
    for (auto& o : noisy) {
      o.omega_hz = perturb(o.omega_hz, mc.sigma_rel, rng);
      if (o.amplitude) o.amplitude = perturb(*o.amplitude, mc.sigma_rel, rng);
    }
    return identify_two_freq(noisy, prior, manifolds, options);
  });
}

IdentResult monte_carlo_single_test(const TestObservation& base, const PriorKnowledge& prior,
                                    const Manifold& manifold, const MonteCarloOptions& mc,
                                    const IdentOptions& options) {
  IdentResult point = identify_single_test(base, prior, manifold, options);
  return run_monte_carlo(std::move(point), mc, [&](std::mt19937_64& rng) {
    TestObservation noisy = base;
    noisy.omega_hz = perturb(noisy.omega_hz, mc.sigma_rel, rng);
    if (noisy.amplitude) noisy.amplitude = perturb(*noisy.amplitude, mc.sigma_rel, rng);
    return identify_single_test(noisy, prior, manifold, options);
  });
}

}  // namespace mrftid

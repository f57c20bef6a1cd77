#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mrftid/lprs.hpp"
#include "mrftid/plant.hpp"

namespace mrftid {

inline constexpr int kManifoldFormatVersion = 1;
inline constexpr const char* kSolverVersion = "mrftid-lprs-1";

/// Log-spaced normalized parameter grid.
struct GridSpec {
  double tp_min = 0.005;
  double tp_max = 0.5;
  int tp_count = 60;
  double td_min = 0.05;
  double td_max = 20.0;
  int td_count = 120;

  void validate() const;
};

struct ManifoldTolerances {
  /// Relative tolerance of the delay root inside a cell, in units of the period.
  double tau_tol = 1e-12;
  /// Accept a cell only if the principal LPRS root re-solves to 1 Hz within this.
  double verify_rel = 1e-6;
  /// Run the verification solve for every cell.
  bool verify = true;
  LprsOptions lprs{};
};

struct CellFailure {
  int tp_index;
  int td_index;
  std::string message;
};

struct GeneratorInfo {
  ManifoldTolerances tolerances{};
  std::optional<std::string> timestamp;
  std::string solver_version = kSolverVersion;
  std::vector<CellFailure> failed_cells;
};

/**
 * Unit frequency manifold with its unit gain manifold: for each (T_p, T_d) node, the delay
 * tau that makes SOIPTD(K = 1, T_p, T_d, tau) oscillate at 1 Hz under MRFT(beta, h = 1), and
 * the amplitude of that oscillation. Infeasible nodes hold NaN.
 */
struct Manifold {
  double beta = 0.0;
  std::string model = "SOIPTD";
  double freq_hz = 1.0;
  double gain = 1.0;
  int integrators = 1;
  std::vector<double> tp_axis;
  std::vector<double> td_axis;
  Eigen::MatrixXd tau;  ///< rows follow tp_axis, columns td_axis
  Eigen::MatrixXd amp;
  GeneratorInfo generator{};

  [[nodiscard]] bool feasible(Eigen::Index i, Eigen::Index j) const {
    return std::isfinite(tau(i, j));
  }
  [[nodiscard]] std::size_t feasible_count() const;
};

struct CellSolution {
  bool feasible = false;
  double tau = 0.0;
  double amplitude = 0.0;
};

/**
 * Delay that puts the principal MRFT cycle of SOIPTD(1, tp, td, tau) at 1 Hz.
 *
 * The delay only shifts the periodic response in time, so at omega = 2 pi the delay-free
 * waveform fixes the amplitude and the switching instant; tau follows from the shift
 * modulo one period, choosing the branch nearest the describing-function estimate.
 * Infeasible when that branch needs tau < 0. With verification on, a full LPRS solve
 * must return 1 Hz as the principal root, otherwise CellSolveFailed is thrown.
 */
CellSolution solve_unit_cell(double beta, double tp, double td,
                             const ManifoldTolerances& tol = {});

/// Solves every cell; failed cells are recorded in generator.failed_cells and left infeasible.
Manifold generate_ufm(double beta, const GridSpec& grid = {}, const ManifoldTolerances& tol = {},
                      unsigned threads = 0);

/// Manifold with every time parameter multiplied by gamma = 1 / omega_hz and amplitudes
/// by gamma^{n_i}.
struct ScaledManifold {
  double beta = 0.0;
  double gamma = 1.0;
  int integrators = 1;
  std::vector<double> tp_axis;
  std::vector<double> td_axis;
  Eigen::MatrixXd tau;
  Eigen::MatrixXd amp;
};

ScaledManifold scale_manifold(const Manifold& man, double omega_hz);

/// tau(T_d) and amplitude(T_d) along the scaled manifold at a fixed T_p. NaN marks gaps.
struct SliceCurve {
  double tp = 0.0;
  std::vector<double> td;
  std::vector<double> tau;
  std::vector<double> amp;

  /// Piecewise linear in log T_d; NaN outside the axis or next to a gap.
  [[nodiscard]] double tau_at(double td_value) const;
  [[nodiscard]] double amp_at(double td_value) const;
};

/// Linear interpolation in log T_p between the two bracketing rows. OutOfGridRange when
/// tp is outside the axis.
SliceCurve slice_at_tp(const ScaledManifold& man, double tp);

/// Bilinear interpolation of tau in (log T_p, log T_d); NaN when a corner is infeasible.
double interpolate_tau(const Manifold& man, double tp, double td);
double interpolate_amp(const Manifold& man, double tp, double td);

// ---- persistence ----

/// SHA-256 over the canonical JSON payload, excluding the checksum and the timestamp.
std::string manifold_checksum(const Manifold& man);

void save_manifold(const Manifold& man, std::ostream& out);
void save_manifold(const Manifold& man, const std::string& path);

struct LoadOptions {
  /// Number of feasible cells re-solved on load; 0 disables the check.
  int spot_checks = 8;
  std::uint64_t seed = 0;
  /// Allowed relative frequency error of a spot check.
  double stale_rel = 0.005;
};

Manifold load_manifold(std::istream& in, const LoadOptions& options = {});
Manifold load_manifold(const std::string& path, const LoadOptions& options = {});

}  // namespace mrftid

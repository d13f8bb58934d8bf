// SPDX-License-Identifier: Apache-2.0
/// \file runner.hpp
/// \brief Closed-loop orchestration: runs a configured scenario in one of
///        four modes and collects trace snapshots plus metrics.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twolane/config.hpp"
#include "twolane/field.hpp"
#include "twolane/linearize.hpp"

namespace twolane {

/// Finite-time horizons implied by the characteristic speeds:
///   t_f   = L/eps1 + L/mu2 + L/mu1   (state-feedback settling bound)
///   t_o   = L/eps1 + L/eps2 + L/mu2  (observer settling bound)
///   t_out = t_o + t_f                (output-feedback settling bound)
struct AnalyticBounds {
  double t_f = 0.0;
  double t_o = 0.0;
  double t_out = 0.0;
};
AnalyticBounds analytic_bounds(const LinearCoeffs& lc);

/// Relative L2 deviation norms per recorded time, per lane and combined.
struct NormSeries {
  std::vector<double> slow;
  std::vector<double> fast;
  std::vector<double> combined;
};

struct Metrics {
  NormSeries deviation;          ///< plant deviation from the steady state
  NormSeries estimation_error;   ///< observer error (empty without observer)
  double initial_deviation = 0.0;
  double initial_estimation_error = 0.0;
  double threshold_fraction = 0.0;  ///< convergence level relative to initial
  /// First recorded time after which the combined deviation norm stays below
  /// threshold_fraction * initial_deviation; NaN when never reached.
  double convergence_time = 0.0;
  double t_f = 0.0;
  double t_o = 0.0;
  double t_out = 0.0;
  int saturated_steps = 0;
};

/// Recorded closed-loop history.  Rows align across all per-time vectors.
struct Trace {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> rho_slow;  ///< absolute densities (veh/m)
  std::vector<std::vector<double>> v_slow;    ///< absolute speeds (m/s)
  std::vector<std::vector<double>> rho_fast;
  std::vector<std::vector<double>> v_fast;
  bool has_estimates = false;
  std::vector<std::vector<double>> rho_slow_est;
  std::vector<std::vector<double>> v_slow_est;
  std::vector<std::vector<double>> rho_fast_est;
  std::vector<std::vector<double>> v_fast_est;
  std::vector<double> cmd_slow;  ///< command applied during the step that
  std::vector<double> cmd_fast;  ///< starts at the recorded time (m/s)

  // Provenance metadata.
  std::string mode;
  std::string plant;
  std::string scenario;
  std::string steady_mode;
  std::string scheme;
  std::string version;
  std::uint64_t config_hash = 0;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
};

/// Runs the configured scenario end to end: steady state, linearization,
/// kernels (as the mode requires), the closed loop under a one-step command
/// hold, and metric extraction.  Component errors are re-thrown with the
/// failing stage named.
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace twolane

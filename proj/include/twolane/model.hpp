// SPDX-License-Identifier: Apache-2.0
/// \file model.hpp
/// \brief Two-lane second-order traffic model: parameters, pressure and
///        equilibrium-speed closures, and uniform steady states.
///
/// The model couples a slow lane and a fast lane.  Each lane carries a
/// density rho_i and a mean speed v_i; lane exchange is driven by per-lane
/// preference times (t_pref_*) and relaxation toward an equilibrium speed is
/// driven by per-lane relaxation times (t_relax_*).  All quantities are SI:
/// veh/m, m/s, s, m.

#pragma once

#include <string>
#include <vector>

#include "twolane/errors.hpp"

namespace twolane {

/// How the traffic-pressure normalization density is chosen per lane.
enum class PressureNorm {
  per_lane,    ///< p_i uses that lane's own maximum density (default)
  shared,      ///< both lanes use the equivalent single-lane maximum
};

/// How the per-lane maximum densities derive from the equivalent single-lane
/// maximum rho_max_equiv.
enum class LaneMaxRule {
  zero_of_speed,   ///< lane max = density where that lane's equilibrium
                   ///< speed curve reaches zero (default)
  scaled_up,       ///< compatibility variant: lane max = rho_max_equiv *
                   ///< r_i^{1/gamma} (mirrors the zero_of_speed exponent
                   ///< with opposite sign)
};

/// Physical parameters of the two-lane model.
struct ModelParams {
  double gamma = 0.0;           ///< pressure/speed exponent, dimensionless
  double v_max = 0.0;           ///< free-flow speed (m/s)
  double rho_max_equiv = 0.0;   ///< equivalent single-lane max density (veh/m)
  double seg_length = 0.0;      ///< road segment length L (m)
  double t_pref_slow = 0.0;     ///< slow-lane preference time T_s (s)
  double t_pref_fast = 0.0;     ///< fast-lane preference time T_f (s)
  double t_relax_slow = 0.0;    ///< slow-lane relaxation time T_s^e (s)
  double t_relax_fast = 0.0;    ///< fast-lane relaxation time T_f^e (s)

  PressureNorm pressure_norm = PressureNorm::per_lane;
  LaneMaxRule lane_max_rule = LaneMaxRule::zero_of_speed;

  /// Throws Error(config) unless every entry is strictly positive and finite.
  void validate() const;
};

/// Relative residuals of the three steady-balance relations evaluated on a
/// SteadyState: lane-exchange mass balance and the two velocity balances.
struct EquilibriumResiduals {
  double mass = 0.0;
  double momentum_slow = 0.0;
  double momentum_fast = 0.0;

  double max_abs() const;
};

/// A spatially uniform steady state of the two-lane model.
struct SteadyState {
  double sigma = 0.0;          ///< preference-time ratio T_f / T_s
  double r_slow = 0.0;         ///< slow-lane speed-reduction factor
  double r_fast = 0.0;         ///< fast-lane speed-reduction factor
  double rho_star_slow = 0.0;  ///< steady density, slow lane (veh/m)
  double rho_star_fast = 0.0;  ///< steady density, fast lane (veh/m)
  double v_star_slow = 0.0;    ///< steady speed, slow lane (m/s)
  double v_star_fast = 0.0;    ///< steady speed, fast lane (m/s)
  double p_star_slow = 0.0;    ///< steady pressure, slow lane (m/s)
  double p_star_fast = 0.0;    ///< steady pressure, fast lane (m/s)
  double q_star_slow = 0.0;    ///< steady flow rho* v*, slow lane (veh/s)
  double q_star_fast = 0.0;    ///< steady flow rho* v*, fast lane (veh/s)
  double rho_max_slow = 0.0;   ///< slow-lane maximum density (veh/m)
  double rho_max_fast = 0.0;   ///< fast-lane maximum density (veh/m)
  bool congested = false;      ///< both lanes in the congested regime
  EquilibriumResiduals residuals;
};

/// Traffic pressure p(rho) = v_max (rho / lane_max)^gamma  (m/s).
/// Throws Error(domain) for rho < 0 or non-positive lane_max.
double pressure(double rho, double lane_max, const ModelParams& params);

/// Derivative dp/drho; satisfies rho p'(rho) = gamma p(rho).
double pressure_slope(double rho, double lane_max, const ModelParams& params);

/// Density that normalizes the pressure of a lane with maximum \p lane_max
/// under the configured PressureNorm rule.
double pressure_norm_density(const ModelParams& params, double lane_max);

/// Single-lane equilibrium speed V(rho) = v_max (1 - (rho/rho_max_equiv)^gamma).
/// Throws Error(domain) outside [0, rho_max_equiv].
double equilibrium_speed(double rho, const ModelParams& params);

/// Speed-reduction factors (r_slow, r_fast) from gamma, the preference-time
/// ratio sigma = t_pref_fast / t_pref_slow, and the relaxation/preference
/// ratios.  Both equal 1 when sigma == 1.
struct ReductionFactors {
  double r_slow = 0.0;
  double r_fast = 0.0;
};
ReductionFactors reduction_factors(const ModelParams& params);

/// Uniform steady state consistent with the lane-exchange and relaxation
/// balances: rho*_fast = sigma rho*_slow and v*_i from the reduction factors.
/// Throws Error(domain) when the implied densities leave (0, lane max).
SteadyState compute_steady_state(const ModelParams& params,
                                 double rho_star_slow);

/// Steady state assembled from explicitly prescribed densities, speeds, and
/// lane maxima (reference operating point).  The prescribed values are taken
/// verbatim; pressures, flows, and the residual report are derived from
/// them, so the residuals are generally nonzero.
SteadyState steady_state_as_given(const ModelParams& params,
                                  double rho_star_slow, double rho_star_fast,
                                  double v_star_slow, double v_star_fast,
                                  double rho_max_slow, double rho_max_fast);

/// Equivalent single-lane maximum density that makes the slow-lane maximum
/// of compute_steady_state land on \p rho_max_slow_target.
double rho_max_equiv_for_slow_max(const ModelParams& params,
                                  double rho_max_slow_target);

/// One sampled point of a fundamental diagram curve.
struct FdPoint {
  double rho = 0.0;  ///< density (veh/m)
  double v = 0.0;    ///< speed (m/s)
  double q = 0.0;    ///< flow rho*v (veh/s)
};

/// Sampled per-lane and single-lane equilibrium flow/density curves.
/// Lane curves use V_i(rho) = v_max (1 - r_i (rho/rho_max_equiv)^gamma),
/// sampled on [0, rho_zero_i] where V_i vanishes.
struct FdTable {
  std::vector<FdPoint> slow;
  std::vector<FdPoint> fast;
  std::vector<FdPoint> single_lane;
};
FdTable fundamental_diagram_samples(const ModelParams& params,
                                    const SteadyState& ss, int n_samples);

/// Table of default parameters used when a configuration omits the [model]
/// section: 1 km segment, gamma 0.8, 144 km/h free-flow speed, preference
/// times 50/25 s, relaxation times 200/100 s, and an equivalent single-lane
/// maximum chosen so the slow-lane maximum is 240 veh/km.
ModelParams default_params();

/// Default reference operating point on default_params(): densities
/// 180/80 veh/km and speeds 32/40 km/h (congested on both lanes).
SteadyState default_steady_as_given(const ModelParams& params);

}  // namespace twolane

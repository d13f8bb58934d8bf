// SPDX-License-Identifier: Apache-2.0
/// \file model.cpp
/// \brief Closures and steady-state construction for the two-lane model.

#include "twolane/model.hpp"

#include <algorithm>
#include <cmath>

#include "twolane/units.hpp"

namespace twolane {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::config,
                std::string("model parameter '") + name +
                    "' must be positive and finite");
  }
}

/// Relative residual |a + b| / max(|a|, |b|), zero when both terms vanish.
double relative_residual(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale == 0.0) return 0.0;
  return std::fabs(a + b) / scale;
}

}  // namespace

void ModelParams::validate() const {
  require_positive(gamma, "gamma");
  require_positive(v_max, "v_max");
  require_positive(rho_max_equiv, "rho_max_equiv");
  require_positive(seg_length, "seg_length");
  require_positive(t_pref_slow, "t_pref_slow");
  require_positive(t_pref_fast, "t_pref_fast");
  require_positive(t_relax_slow, "t_relax_slow");
  require_positive(t_relax_fast, "t_relax_fast");
}

double EquilibriumResiduals::max_abs() const {
  return std::max({std::fabs(mass), std::fabs(momentum_slow),
                   std::fabs(momentum_fast)});
}

double pressure(double rho, double lane_max, const ModelParams& params) {
  if (!(rho >= 0.0)) {
    throw Error(ErrorKind::domain, "pressure: density must be non-negative");
  }
  if (!(lane_max > 0.0)) {
    throw Error(ErrorKind::domain, "pressure: lane maximum must be positive");
  }
  return params.v_max * std::pow(rho / lane_max, params.gamma);
}

double pressure_slope(double rho, double lane_max, const ModelParams& params) {
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::domain,
                "pressure_slope: density must be positive");
  }
  // d/drho [v_max (rho/lane_max)^gamma] = gamma p(rho) / rho.
  return params.gamma * pressure(rho, lane_max, params) / rho;
}

double equilibrium_speed(double rho, const ModelParams& params) {
  if (!(rho >= 0.0) || rho > params.rho_max_equiv) {
    throw Error(ErrorKind::domain,
                "equilibrium_speed: density outside [0, rho_max_equiv]");
  }
  return params.v_max *
         (1.0 - std::pow(rho / params.rho_max_equiv, params.gamma));
}

ReductionFactors reduction_factors(const ModelParams& params) {
  params.validate();
  const double sigma = params.t_pref_fast / params.t_pref_slow;
  const double a = params.t_relax_fast / params.t_pref_fast;
  const double b = params.t_relax_slow / params.t_pref_slow;
  const double denom = 1.0 + a + b;
  ReductionFactors r;
  // sigma == 1 collapses both factors to exactly 1: pow(1, gamma) == 1 and
  // x / x == 1 in IEEE arithmetic, so symmetric lanes stay bitwise symmetric.
  r.r_fast = (1.0 + std::pow(1.0 / sigma, params.gamma) * a + b) / denom;
  r.r_slow = (1.0 + a + std::pow(sigma, params.gamma) * b) / denom;
  return r;
}

double pressure_norm_density(const ModelParams& params, double lane_max) {
  return params.pressure_norm == PressureNorm::per_lane ? lane_max
                                                        : params.rho_max_equiv;
}

namespace {

/// Per-lane maximum densities implied by rho_max_equiv under the configured
/// derivation rule.
void lane_maxima(const ModelParams& params, const ReductionFactors& r,
                 double* max_slow, double* max_fast) {
  const double es = (params.lane_max_rule == LaneMaxRule::zero_of_speed)
                        ? -1.0 / params.gamma
                        : 1.0 / params.gamma;
  *max_slow = params.rho_max_equiv * std::pow(r.r_slow, es);
  *max_fast = params.rho_max_equiv * std::pow(r.r_fast, es);
}

/// Fills pressures, flows, congestion flag, and balance residuals from the
/// starred densities/speeds already present in \p ss.
void finish_steady_state(const ModelParams& params, SteadyState* ss) {
  ss->p_star_slow = pressure(
      ss->rho_star_slow, pressure_norm_density(params, ss->rho_max_slow),
      params);
  ss->p_star_fast = pressure(
      ss->rho_star_fast, pressure_norm_density(params, ss->rho_max_fast),
      params);
  ss->q_star_slow = ss->rho_star_slow * ss->v_star_slow;
  ss->q_star_fast = ss->rho_star_fast * ss->v_star_fast;
  ss->congested = (ss->v_star_slow < params.gamma * ss->p_star_slow) &&
                  (ss->v_star_fast < params.gamma * ss->p_star_fast);

  // Lane-exchange mass balance: sigma rho*_s - rho*_f = 0.
  ss->residuals.mass =
      relative_residual(ss->sigma * ss->rho_star_slow, -ss->rho_star_fast);
  // Velocity balances; the relaxation target is the shared single-lane curve.
  const double vs = ss->v_star_slow;
  const double vf = ss->v_star_fast;
  const double exch_s = (ss->rho_star_fast / ss->rho_star_slow) * (vf - vs) /
                        params.t_pref_fast;
  const double relax_s =
      (equilibrium_speed(std::min(ss->rho_star_slow, params.rho_max_equiv),
                         params) -
       vs) /
      params.t_relax_slow;
  ss->residuals.momentum_slow = relative_residual(exch_s, relax_s);
  const double exch_f = (ss->rho_star_slow / ss->rho_star_fast) * (vs - vf) /
                        params.t_pref_slow;
  const double relax_f =
      (equilibrium_speed(std::min(ss->rho_star_fast, params.rho_max_equiv),
                         params) -
       vf) /
      params.t_relax_fast;
  ss->residuals.momentum_fast = relative_residual(exch_f, relax_f);
}

}  // namespace

SteadyState compute_steady_state(const ModelParams& params,
                                 double rho_star_slow) {
  params.validate();
  if (!(rho_star_slow > 0.0)) {
    throw Error(ErrorKind::domain,
                "compute_steady_state: rho_star_slow must be positive");
  }
  SteadyState ss;
  ss.sigma = params.t_pref_fast / params.t_pref_slow;
  const ReductionFactors r = reduction_factors(params);
  ss.r_slow = r.r_slow;
  ss.r_fast = r.r_fast;
  ss.rho_star_slow = rho_star_slow;
  ss.rho_star_fast = ss.sigma * rho_star_slow;
  lane_maxima(params, r, &ss.rho_max_slow, &ss.rho_max_fast);

  const double cs = std::pow(ss.rho_star_slow / params.rho_max_equiv,
                             params.gamma);
  const double cf = std::pow(ss.rho_star_fast / params.rho_max_equiv,
                             params.gamma);
  ss.v_star_slow = params.v_max * (1.0 - r.r_slow * cs);
  ss.v_star_fast = params.v_max * (1.0 - r.r_fast * cf);

  if (!(ss.v_star_slow > 0.0) || !(ss.v_star_fast > 0.0)) {
    throw Error(ErrorKind::domain,
                "compute_steady_state: steady speed not positive; "
                "rho_star_slow too large for these parameters");
  }
  if (!(ss.rho_star_slow < ss.rho_max_slow) ||
      !(ss.rho_star_fast < ss.rho_max_fast)) {
    throw Error(ErrorKind::domain,
                "compute_steady_state: steady density reaches a lane maximum");
  }
  finish_steady_state(params, &ss);
  return ss;
}

SteadyState steady_state_as_given(const ModelParams& params,
                                  double rho_star_slow, double rho_star_fast,
                                  double v_star_slow, double v_star_fast,
                                  double rho_max_slow, double rho_max_fast) {
  params.validate();
  if (!(rho_star_slow > 0.0) || !(rho_star_fast > 0.0) ||
      !(v_star_slow > 0.0) || !(v_star_fast > 0.0)) {
    throw Error(ErrorKind::domain,
                "steady_state_as_given: densities and speeds must be positive");
  }
  if (!(rho_star_slow < rho_max_slow) || !(rho_star_fast < rho_max_fast)) {
    throw Error(ErrorKind::domain,
                "steady_state_as_given: density must stay below its lane max");
  }
  SteadyState ss;
  ss.sigma = params.t_pref_fast / params.t_pref_slow;
  const ReductionFactors r = reduction_factors(params);
  ss.r_slow = r.r_slow;
  ss.r_fast = r.r_fast;
  ss.rho_star_slow = rho_star_slow;
  ss.rho_star_fast = rho_star_fast;
  ss.v_star_slow = v_star_slow;
  ss.v_star_fast = v_star_fast;
  ss.rho_max_slow = rho_max_slow;
  ss.rho_max_fast = rho_max_fast;
  finish_steady_state(params, &ss);
  return ss;
}

double rho_max_equiv_for_slow_max(const ModelParams& params,
                                  double rho_max_slow_target) {
  if (!(rho_max_slow_target > 0.0)) {
    throw Error(ErrorKind::domain,
                "rho_max_equiv_for_slow_max: target must be positive");
  }
  // reduction_factors does not depend on rho_max_equiv, so invert directly.
  ModelParams p = params;
  if (!(p.rho_max_equiv > 0.0)) p.rho_max_equiv = rho_max_slow_target;
  const ReductionFactors r = reduction_factors(p);
  const double es = (params.lane_max_rule == LaneMaxRule::zero_of_speed)
                        ? 1.0 / params.gamma
                        : -1.0 / params.gamma;
  return rho_max_slow_target * std::pow(r.r_slow, es);
}

FdTable fundamental_diagram_samples(const ModelParams& params,
                                    const SteadyState& ss, int n_samples) {
  params.validate();
  if (n_samples < 2) {
    throw Error(ErrorKind::domain,
                "fundamental_diagram_samples: need at least 2 samples");
  }
  auto sample_curve = [&](double r, double rho_end) {
    std::vector<FdPoint> pts(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
      FdPoint& pt = pts[static_cast<std::size_t>(i)];
      pt.rho = rho_end * static_cast<double>(i) /
               static_cast<double>(n_samples - 1);
      pt.v = params.v_max *
             (1.0 -
              r * std::pow(pt.rho / params.rho_max_equiv, params.gamma));
      pt.q = pt.rho * pt.v;
    }
    return pts;
  };
  FdTable table;
  // Each lane curve is sampled up to the density where its speed vanishes.
  const double inv_gamma = 1.0 / params.gamma;
  table.slow = sample_curve(
      ss.r_slow, params.rho_max_equiv * std::pow(ss.r_slow, -inv_gamma));
  table.fast = sample_curve(
      ss.r_fast, params.rho_max_equiv * std::pow(ss.r_fast, -inv_gamma));
  table.single_lane = sample_curve(1.0, params.rho_max_equiv);
  return table;
}

ModelParams default_params() {
  ModelParams p;
  p.gamma = 0.8;
  p.v_max = kmh_to_ms(144.0);
  p.seg_length = 1000.0;
  p.t_pref_slow = 50.0;
  p.t_pref_fast = 25.0;
  p.t_relax_slow = 200.0;
  p.t_relax_fast = 100.0;
  p.rho_max_equiv = rho_max_equiv_for_slow_max(p, vehkm_to_vehm(240.0));
  return p;
}

SteadyState default_steady_as_given(const ModelParams& params) {
  return steady_state_as_given(params, vehkm_to_vehm(180.0),
                               vehkm_to_vehm(80.0), kmh_to_ms(32.0),
                               kmh_to_ms(40.0), vehkm_to_vehm(240.0),
                               vehkm_to_vehm(150.0));
}

}  // namespace twolane

// SPDX-License-Identifier: Apache-2.0
/// \file sim.cpp
/// \brief Explicit time steppers for the linearized and nonlinear models.

#include "twolane/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twolane {

void SimConfig::validate() const {
  if (!(cfl > 0.0) || cfl > 1.0) {
    throw Error(ErrorKind::config, "sim: cfl must lie in (0, 1]");
  }
  if (!(t_end > 0.0)) {
    throw Error(ErrorKind::config, "sim: t_end must be positive");
  }
  if (record_every < 1) {
    throw Error(ErrorKind::config, "sim: record_every must be >= 1");
  }
  if (grid.n_cells < 8) {
    throw Error(ErrorKind::config, "sim: grid needs at least 8 cells");
  }
}

Injection Injection::zeros(const Grid& grid) {
  Injection inj;
  const std::size_t n = static_cast<std::size_t>(grid.n_cells);
  inj.w_slow.assign(n, 0.0);
  inj.w_fast.assign(n, 0.0);
  inj.vbar_slow.assign(n, 0.0);
  inj.vbar_fast.assign(n, 0.0);
  return inj;
}

double cfl_dt(const Grid& grid, const LinearCoeffs& lc, double cfl) {
  if (!(cfl > 0.0) || cfl > 1.0) {
    throw Error(ErrorKind::config, "cfl_dt: cfl must lie in (0, 1]");
  }
  const double fastest = std::max(lc.eps2, lc.mu1);
  return cfl * grid.dx / fastest;
}

namespace {

CharField step_linear_core(const CharField& state, const BoundaryInput& input,
                           const LinearCoeffs& lc, const Injection* inj,
                           double dt) {
  const Grid& grid = state.grid;
  const int n = grid.n_cells;
  const double fastest = std::max(lc.eps2, lc.mu1);
  if (dt * fastest > grid.dx * (1.0 + 1e-12)) {
    throw Error(ErrorKind::numerics,
                "step_linear: dt violates the CFL bound dx / max(eps2, mu1)");
  }
  const double ce1 = lc.eps1 * dt / grid.dx;
  const double ce2 = lc.eps2 * dt / grid.dx;
  const double cm1 = lc.mu1 * dt / grid.dx;
  const double cm2 = lc.mu2 * dt / grid.dx;

  CharField next = CharField::zeros(grid);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const double x = grid.centers[js];
    const Mat2 aww = lc.abar_ww();
    const Mat2 awv = lc.abar_wv(x);
    const Mat2 avw = lc.abar_vw(x);
    const Mat2 avv = lc.abar_vv(x);
    const double ws = state.w_slow[js];
    const double wf = state.w_fast[js];
    const double vs = state.vbar_slow[js];
    const double vf = state.vbar_fast[js];

    double src_ws = aww.m[0][0] * ws + aww.m[0][1] * wf + awv.m[0][0] * vs +
                    awv.m[0][1] * vf;
    double src_wf = aww.m[1][0] * ws + aww.m[1][1] * wf + awv.m[1][0] * vs +
                    awv.m[1][1] * vf;
    double src_vs = avw.m[0][0] * ws + avw.m[0][1] * wf + avv.m[0][1] * vf;
    double src_vf = avw.m[1][0] * ws + avw.m[1][1] * wf + avv.m[1][0] * vs;
    if (inj != nullptr) {
      src_ws += inj->w_slow[js];
      src_wf += inj->w_fast[js];
      src_vs += inj->vbar_slow[js];
      src_vf += inj->vbar_fast[js];
    }

    // Upwind transport: w~ moves downstream, vbar moves upstream.  The
    // inlet ghost applies the reflection against the first-cell vbar; the
    // outlet ghost applies the commanded boundary value.
    const double w_up_s =
        (j > 0) ? state.w_slow[js - 1] : lc.k_slow * state.vbar_slow[0];
    const double w_up_f =
        (j > 0) ? state.w_fast[js - 1] : lc.k_fast * state.vbar_fast[0];
    const double v_dn_s =
        (j < n - 1) ? state.vbar_slow[js + 1] : lc.l_slow * input.u_slow;
    const double v_dn_f =
        (j < n - 1) ? state.vbar_fast[js + 1] : lc.l_fast * input.u_fast;

    next.w_slow[js] = ws - ce1 * (ws - w_up_s) + dt * src_ws;
    next.w_fast[js] = wf - ce2 * (wf - w_up_f) + dt * src_wf;
    next.vbar_slow[js] = vs + cm1 * (v_dn_s - vs) + dt * src_vs;
    next.vbar_fast[js] = vf + cm2 * (v_dn_f - vf) + dt * src_vf;
  }
  return next;
}

}  // namespace

CharField step_linear(const CharField& state, const BoundaryInput& input,
                      const LinearCoeffs& lc, double dt) {
  return step_linear_core(state, input, lc, nullptr, dt);
}

CharField step_linear_injected(const CharField& state,
                               const BoundaryInput& input,
                               const LinearCoeffs& lc, const Injection& inj,
                               double dt) {
  return step_linear_core(state, input, lc, &inj, dt);
}

namespace {

/// Equilibrium speed extended past rho_max_equiv (negative there) so that
/// transients cannot throw mid-step; blow-up bounds catch runaways instead.
double equilibrium_speed_extended(double rho, const ModelParams& params) {
  return params.v_max *
         (1.0 - std::pow(rho / params.rho_max_equiv, params.gamma));
}

double local_wave_speed(double rho, double v, double lane_norm,
                        const ModelParams& params) {
  const double gp =
      params.gamma * params.v_max * std::pow(rho / lane_norm, params.gamma);
  return std::max(std::fabs(v), std::fabs(v - gp));
}

struct LaneView {
  const std::vector<double>* rho;
  const std::vector<double>* v;
  double lane_norm;     ///< pressure normalization density
  double lane_max;      ///< lane maximum density (blow-up bound)
  double q_star;        ///< steady inlet flux
  double v_star;        ///< steady outlet speed
  double u;             ///< commanded outlet speed deviation
  const char* name;
};

}  // namespace

double max_wave_speed(const TrafficField& field, const ModelParams& params,
                      const SteadyState& ss) {
  const double norm_s = pressure_norm_density(params, ss.rho_max_slow);
  const double norm_f = pressure_norm_density(params, ss.rho_max_fast);
  double m = 0.0;
  for (std::size_t j = 0; j < field.rho_slow.size(); ++j) {
    if (!(field.rho_slow[j] > 0.0) || !(field.rho_fast[j] > 0.0)) {
      throw Error(ErrorKind::numerics,
                  "max_wave_speed: non-positive density at cell " +
                      std::to_string(j));
    }
    m = std::max(
        m, local_wave_speed(field.rho_slow[j], field.v_slow[j], norm_s,
                            params));
    m = std::max(
        m, local_wave_speed(field.rho_fast[j], field.v_fast[j], norm_f,
                            params));
  }
  return m;
}

TrafficField step_nonlinear(const TrafficField& state,
                            const BoundaryInput& input,
                            const ModelParams& params, const SteadyState& ss,
                            double dt) {
  const Grid& grid = state.grid;
  const int n = grid.n_cells;
  const std::size_t ns = static_cast<std::size_t>(n);
  TrafficField next = TrafficField::zeros(grid);

  const LaneView lanes[2] = {
      {&state.rho_slow, &state.v_slow,
       pressure_norm_density(params, ss.rho_max_slow), ss.rho_max_slow,
       ss.q_star_slow, ss.v_star_slow, input.u_slow, "slow"},
      {&state.rho_fast, &state.v_fast,
       pressure_norm_density(params, ss.rho_max_fast), ss.rho_max_fast,
       ss.q_star_fast, ss.v_star_fast, input.u_fast, "fast"},
  };

  // Conservative update per lane on (rho, z) with z = rho (v + p(rho)).
  std::vector<double> rho_new[2], z_new[2];
  for (int lane = 0; lane < 2; ++lane) {
    const LaneView& lv = lanes[lane];
    const std::vector<double>& rho = *lv.rho;
    const std::vector<double>& v = *lv.v;

    // Extended arrays with one ghost cell per side.
    std::vector<double> re(ns + 2), ve(ns + 2);
    for (std::size_t j = 0; j < ns; ++j) {
      re[j + 1] = rho[j];
      ve[j + 1] = v[j];
    }
    // Inlet: constant steady flux q* enters with the first-cell speed.
    ve[0] = v[0];
    re[0] = lv.q_star / std::max(ve[0], 1e-6);
    // Outlet: commanded speed, zeroth-order density extrapolation.
    ve[ns + 1] = lv.v_star + lv.u;
    re[ns + 1] = rho[ns - 1];

    auto p_of = [&](double r) {
      return params.v_max * std::pow(r / lv.lane_norm, params.gamma);
    };
    std::vector<double> ze(ns + 2), f_rho(ns + 2), f_z(ns + 2), speed(ns + 2);
    for (std::size_t j = 0; j < ns + 2; ++j) {
      const double p = p_of(std::max(re[j], 0.0));
      ze[j] = re[j] * (ve[j] + p);
      f_rho[j] = re[j] * ve[j];
      f_z[j] = ze[j] * ve[j];
      speed[j] = std::max(std::fabs(ve[j]),
                          std::fabs(ve[j] - params.gamma * p));
    }

    // Local Lax-Friedrichs fluxes at the n+1 faces.
    std::vector<double> face_rho(ns + 1), face_z(ns + 1);
    for (std::size_t f = 0; f <= ns; ++f) {
      const std::size_t jl = f, jr = f + 1;
      const double a = std::max(speed[jl], speed[jr]);
      face_rho[f] = 0.5 * (f_rho[jl] + f_rho[jr]) - 0.5 * a * (re[jr] - re[jl]);
      face_z[f] = 0.5 * (f_z[jl] + f_z[jr]) - 0.5 * a * (ze[jr] - ze[jl]);
    }

    rho_new[lane].resize(ns);
    z_new[lane].resize(ns);
    const double lam = dt / grid.dx;
    for (std::size_t j = 0; j < ns; ++j) {
      rho_new[lane][j] = re[j + 1] - lam * (face_rho[j + 1] - face_rho[j]);
      z_new[lane][j] = ze[j + 1] - lam * (face_z[j + 1] - face_z[j]);
    }
  }

  // Lane-exchange and relaxation sources, unsplit, evaluated on the old
  // state at cell centers.  S_z = rho S_v + (v + (1+gamma) p) S_rho follows
  // from the chain rule on z = rho (v + p(rho)) with rho p' = gamma p.
  for (std::size_t j = 0; j < ns; ++j) {
    const double rs = state.rho_slow[j], vs = state.v_slow[j];
    const double rf = state.rho_fast[j], vf = state.v_fast[j];
    const double ps =
        params.v_max * std::pow(rs / lanes[0].lane_norm, params.gamma);
    const double pf =
        params.v_max * std::pow(rf / lanes[1].lane_norm, params.gamma);

    const double s_rho_s = -rs / params.t_pref_slow + rf / params.t_pref_fast;
    const double s_rho_f = -rf / params.t_pref_fast + rs / params.t_pref_slow;
    const double s_v_s =
        (rf / rs) * (vf - vs) / params.t_pref_fast +
        (equilibrium_speed_extended(rs, params) - vs) / params.t_relax_slow;
    const double s_v_f =
        (rs / rf) * (vs - vf) / params.t_pref_slow +
        (equilibrium_speed_extended(rf, params) - vf) / params.t_relax_fast;

    rho_new[0][j] += dt * s_rho_s;
    rho_new[1][j] += dt * s_rho_f;
    z_new[0][j] += dt * (rs * s_v_s + (vs + (1.0 + params.gamma) * ps) * s_rho_s);
    z_new[1][j] += dt * (rf * s_v_f + (vf + (1.0 + params.gamma) * pf) * s_rho_f);
  }

  // Recover primitive variables and check blow-up bounds.
  for (int lane = 0; lane < 2; ++lane) {
    const LaneView& lv = lanes[lane];
    std::vector<double>& rho_out = lane == 0 ? next.rho_slow : next.rho_fast;
    std::vector<double>& v_out = lane == 0 ? next.v_slow : next.v_fast;
    for (std::size_t j = 0; j < ns; ++j) {
      const double r = rho_new[lane][j];
      if (!(r > 1e-6) || !(r < 2.0 * lv.lane_max) || !std::isfinite(r)) {
        throw Error(ErrorKind::numerics,
                    std::string("step_nonlinear: density blow-up, lane ") +
                        lv.name + ", cell " + std::to_string(j) +
                        ", rho = " + std::to_string(r * 1000.0) + " veh/km");
      }
      const double p =
          params.v_max * std::pow(r / lv.lane_norm, params.gamma);
      const double v = z_new[lane][j] / r - p;
      if (!(v > 1e-6) || !(v < 2.0 * params.v_max) || !std::isfinite(v)) {
        throw Error(ErrorKind::numerics,
                    std::string("step_nonlinear: speed blow-up, lane ") +
                        lv.name + ", cell " + std::to_string(j) +
                        ", v = " + std::to_string(v * 3.6) + " km/h");
      }
      rho_out[j] = r;
      v_out[j] = v;
    }
  }
  return next;
}

}  // namespace twolane

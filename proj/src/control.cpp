// SPDX-License-Identifier: Apache-2.0
/// \file control.cpp

#include "twolane/control.hpp"

#include <algorithm>
#include <cmath>

#include "twolane/sim.hpp"

namespace twolane {

namespace {

/// Linear interpolation of a physical-axis gain array (index i at x = i h).
double axis_interp(const std::vector<double>& g, const TriMesh& mesh,
                   double x) {
  const int n = mesh.n;
  double gx = std::clamp(x / mesh.h, 0.0, static_cast<double>(n - 1));
  const int i0 = std::min(static_cast<int>(gx), n - 2);
  const double fx = gx - i0;
  return g[static_cast<std::size_t>(i0)] * (1.0 - fx) +
         g[static_cast<std::size_t>(i0 + 1)] * fx;
}

/// Linear interpolation along the outlet edge row x = L of a kernel field.
double edge_interp(const std::vector<double>& f, const TriMesh& mesh,
                   double xi) {
  const int n = mesh.n;
  double gxi = std::clamp(xi / mesh.h, 0.0, static_cast<double>(n - 1));
  const int j0 = std::min(static_cast<int>(gxi), n - 2);
  const double fxi = gxi - j0;
  return f[mesh.idx(n - 1, j0)] * (1.0 - fxi) +
         f[mesh.idx(n - 1, j0 + 1)] * fxi;
}

/// Riemann output of a characteristic-variable field at the outlet cell:
/// reconstructs the density deviation pointwise and applies the measurement
/// scale.  Shared by the plant measurement and the observer prediction so
/// the two agree bitwise on identical states.
double riemann_output_char(const CharField& f, int lane,
                           const ModelParams& params, const SteadyState& ss,
                           const LinearCoeffs& lc, double u_applied) {
  const std::size_t last = f.grid.n_cells - 1;
  const double x = f.grid.centers[last];
  const double w = (lane == 0) ? f.w_slow[last] : f.w_fast[last];
  const double vbar = (lane == 0) ? f.vbar_slow[last] : f.vbar_fast[last];
  const PhysPoint p =
      characteristic_to_physical_point(lane, x, w, vbar, params, ss, lc);
  const double rho_star = (lane == 0) ? ss.rho_star_slow : ss.rho_star_fast;
  const double p_star = (lane == 0) ? ss.p_star_slow : ss.p_star_fast;
  const double scale = params.gamma * p_star / rho_star;
  return scale * p.rho_deviation + u_applied;
}

/// The full-state quadrature evaluated on a characteristic-variable field.
VslCommand vsl_from_char(const CharField& cf, const LinearCoeffs& lc,
                         const KernelSet& ks) {
  // The stored kernels act on the physical characteristic deviations
  // (w-tilde, v-tilde); the exponentially weighted velocity states are
  // unweighted per cell before the quadrature, and the outlet trace of the
  // weighted target state cancels the inverse output gain exactly, so the
  // command is the bare integral.
  const Grid& grid = cf.grid;
  const TriMesh& mesh = ks.mesh;
  const double r1 = lc.rate1();
  const double r2 = lc.rate2();
  double acc_s = 0.0;
  double acc_f = 0.0;
  for (int j = 0; j < grid.n_cells; ++j) {
    const double xi = grid.centers[j];
    const double ws = cf.w_slow[j];
    const double wf = cf.w_fast[j];
    const double vs = std::exp(-r1 * xi) * cf.vbar_slow[j];
    const double vf = std::exp(-r2 * xi) * cf.vbar_fast[j];
    acc_s += edge_interp(ks.k11, mesh, xi) * ws +
             edge_interp(ks.k12, mesh, xi) * wf +
             edge_interp(ks.l11, mesh, xi) * vs +
             edge_interp(ks.l12, mesh, xi) * vf;
    acc_f += edge_interp(ks.k21, mesh, xi) * ws +
             edge_interp(ks.k22, mesh, xi) * wf +
             edge_interp(ks.l21, mesh, xi) * vs +
             edge_interp(ks.l22, mesh, xi) * vf;
  }
  VslCommand cmd;
  cmd.u_slow = grid.dx * acc_s;
  cmd.u_fast = grid.dx * acc_f;
  return cmd;
}

}  // namespace

ObserverState ObserverState::zeros(const Grid& grid) {
  ObserverState est;
  est.field = CharField::zeros(grid);
  return est;
}

ObserverState ObserverState::from_truth(const TrafficField& f,
                                        const ModelParams& params,
                                        const SteadyState& ss,
                                        const LinearCoeffs& lc) {
  ObserverState est;
  est.field = physical_to_characteristic(f, params, ss, lc);
  return est;
}

VslCommand full_state_vsl(const TrafficField& f, const ModelParams& params,
                          const SteadyState& ss, const LinearCoeffs& lc,
                          const KernelSet& ks) {
  return vsl_from_char(physical_to_characteristic(f, params, ss, lc), lc, ks);
}

Measurement measure_outlet(const TrafficField& f, const ModelParams& params,
                           const SteadyState& ss, const VslCommand& applied) {
  Measurement meas;
  const std::size_t last = f.grid.n_cells - 1;
  meas.y_slow = f.rho_slow[last] - ss.rho_star_slow;
  meas.y_fast = f.rho_fast[last] - ss.rho_star_fast;
  meas.yy_slow = params.gamma * ss.p_star_slow / ss.rho_star_slow *
                     meas.y_slow +
                 applied.u_slow;
  meas.yy_fast = params.gamma * ss.p_star_fast / ss.rho_star_fast *
                     meas.y_fast +
                 applied.u_fast;
  return meas;
}

Measurement measure_outlet_char(const CharField& f, const ModelParams& params,
                                const SteadyState& ss, const LinearCoeffs& lc,
                                const VslCommand& applied) {
  Measurement meas;
  const std::size_t last = f.grid.n_cells - 1;
  const double x = f.grid.centers[last];
  const PhysPoint ps = characteristic_to_physical_point(
      0, x, f.w_slow[last], f.vbar_slow[last], params, ss, lc);
  const PhysPoint pf = characteristic_to_physical_point(
      1, x, f.w_fast[last], f.vbar_fast[last], params, ss, lc);
  meas.y_slow = ps.rho_deviation;
  meas.y_fast = pf.rho_deviation;
  meas.yy_slow =
      riemann_output_char(f, 0, params, ss, lc, applied.u_slow);
  meas.yy_fast =
      riemann_output_char(f, 1, params, ss, lc, applied.u_fast);
  return meas;
}

ObserverState observer_step(const ObserverState& est, const Measurement& meas,
                            const VslCommand& applied,
                            const ModelParams& params, const SteadyState& ss,
                            const LinearCoeffs& lc,
                            const ObserverKernelSet& oks, double dt) {
  const Grid& grid = est.field.grid;

  // Innovation: measured Riemann outputs minus the observer's prediction,
  // built through the identical reconstruction path.  The applied command
  // cancels, so the innovation depends only on the outlet density error.
  const double inn_s =
      meas.yy_slow -
      riemann_output_char(est.field, 0, params, ss, lc, applied.u_slow);
  const double inn_f =
      meas.yy_fast -
      riemann_output_char(est.field, 1, params, ss, lc, applied.u_fast);

  Injection inj = Injection::zeros(grid);
  const TriMesh& mesh = oks.mesh;
  for (int j = 0; j < grid.n_cells; ++j) {
    const double x = grid.centers[j];
    inj.w_slow[j] = axis_interp(oks.p11, mesh, x) * inn_s +
                    axis_interp(oks.p12, mesh, x) * inn_f;
    inj.w_fast[j] = axis_interp(oks.p21, mesh, x) * inn_s +
                    axis_interp(oks.p22, mesh, x) * inn_f;
    inj.vbar_slow[j] = axis_interp(oks.q11, mesh, x) * inn_s +
                       axis_interp(oks.q12, mesh, x) * inn_f;
    inj.vbar_fast[j] = axis_interp(oks.q21, mesh, x) * inn_s +
                       axis_interp(oks.q22, mesh, x) * inn_f;
  }

  BoundaryInput input;
  input.u_slow = applied.u_slow;
  input.u_fast = applied.u_fast;
  ObserverState next;
  next.field = step_linear_injected(est.field, input, lc, inj, dt);
  return next;
}

TrafficField estimates_to_physical(const ObserverState& est,
                                   const ModelParams& params,
                                   const SteadyState& ss,
                                   const LinearCoeffs& lc) {
  return characteristic_to_physical(est.field, params, ss, lc);
}

VslCommand output_feedback_vsl(const ObserverState& est,
                               const ModelParams& params,
                               const SteadyState& ss, const LinearCoeffs& lc,
                               const KernelSet& ks) {
  return full_state_vsl(estimates_to_physical(est, params, ss, lc), params,
                        ss, lc, ks);
}

VslCommand saturate_command(const VslCommand& cmd, double bound_mps) {
  if (!(bound_mps > 0.0)) return cmd;
  VslCommand out = cmd;
  if (std::fabs(out.u_slow) > bound_mps) {
    out.u_slow = std::copysign(bound_mps, out.u_slow);
    out.saturated_slow = true;
  }
  if (std::fabs(out.u_fast) > bound_mps) {
    out.u_fast = std::copysign(bound_mps, out.u_fast);
    out.saturated_fast = true;
  }
  return out;
}

}  // namespace twolane

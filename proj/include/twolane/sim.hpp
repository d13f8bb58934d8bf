// SPDX-License-Identifier: Apache-2.0
/// \file sim.hpp
/// \brief Time steppers for the linearized and nonlinear two-lane dynamics.

#pragma once

#include <vector>

#include "twolane/field.hpp"
#include "twolane/linearize.hpp"
#include "twolane/model.hpp"

namespace twolane {

/// Spatial discretization of the hyperbolic part.
enum class Scheme {
  upwind,          ///< first-order characteristic upwinding (linearized runs)
  lax_friedrichs,  ///< local Lax-Friedrichs finite volumes (nonlinear runs)
};

/// Time-integration settings shared by all runs.
struct SimConfig {
  Grid grid;
  double cfl = 0.8;       ///< Courant number in (0, 1]
  double t_end = 0.0;     ///< final time (s)
  int record_every = 1;   ///< snapshot decimation in steps
  Scheme scheme = Scheme::upwind;

  void validate() const;
};

/// Variable-speed-limit deviations commanded at the outlet (m/s).
struct BoundaryInput {
  double u_slow = 0.0;
  double u_fast = 0.0;
};

/// Additive per-cell source terms for the characteristic equations, used by
/// the boundary observer to apply output-injection corrections.
struct Injection {
  std::vector<double> w_slow;
  std::vector<double> w_fast;
  std::vector<double> vbar_slow;
  std::vector<double> vbar_fast;

  static Injection zeros(const Grid& grid);
};

/// Time step dt = cfl dx / max(eps2, mu1) for the linearized dynamics.
double cfl_dt(const Grid& grid, const LinearCoeffs& lc, double cfl);

/// Largest local wave speed max(|v|, |v - gamma p|) over cells and lanes;
/// sets the nonlinear CFL bound.
double max_wave_speed(const TrafficField& field, const ModelParams& params,
                      const SteadyState& ss);

/// One explicit upwind step of the linearized characteristic system.
/// Inlet: w~_i ghost from the reflection w~_i(0) = k_i vbar_i(0); outlet:
/// vbar_i ghost from vbar_i(L) = l_i u_i.  Sources are applied unsplit at
/// cell centers.  Throws Error(numerics) if dt violates the CFL bound.
CharField step_linear(const CharField& state, const BoundaryInput& input,
                      const LinearCoeffs& lc, double dt);

/// Same stepper with additive injection sources (observer copy of the
/// dynamics).  \p inj entries are rates (per second) added to each equation.
CharField step_linear_injected(const CharField& state,
                               const BoundaryInput& input,
                               const LinearCoeffs& lc, const Injection& inj,
                               double dt);

/// One local Lax-Friedrichs step of the nonlinear two-lane model on the
/// conservative variables (rho_i, rho_i (v_i + p_i)).  Inlet ghosts hold the
/// steady flux; outlet ghosts command v = v*_i + u_i with zeroth-order
/// density extrapolation.  Throws Error(numerics) on blow-up (density or
/// speed outside generous physical bounds), reporting the cell index.
TrafficField step_nonlinear(const TrafficField& state,
                            const BoundaryInput& input,
                            const ModelParams& params, const SteadyState& ss,
                            double dt);

}  // namespace twolane

// SPDX-License-Identifier: Apache-2.0
/// \file control.hpp
/// \brief Boundary feedback laws, the collocated boundary observer, and the
///        composed output-feedback controller.

#pragma once

#include "twolane/field.hpp"
#include "twolane/kernels.hpp"
#include "twolane/linearize.hpp"
#include "twolane/model.hpp"

namespace twolane {

/// Outlet density measurements and the Riemann outputs reconstructed from
/// them:  Y_i = (gamma p_i*/rho_i*) y_i + U_i.
struct Measurement {
  double y_slow = 0.0;   ///< rho deviation at the outlet, slow lane (veh/m)
  double y_fast = 0.0;   ///< rho deviation at the outlet, fast lane (veh/m)
  double yy_slow = 0.0;  ///< Riemann output Y_s (m/s)
  double yy_fast = 0.0;  ///< Riemann output Y_f (m/s)
};

/// Observer state in the scaled characteristic variables (w-hat, vbar-hat),
/// collocated with the plant grid.
struct ObserverState {
  CharField field;

  /// Estimates initialized at the uniform steady state (zero deviations).
  static ObserverState zeros(const Grid& grid);

  /// Estimates initialized at the exact plant state.
  static ObserverState from_truth(const TrafficField& f,
                                  const ModelParams& params,
                                  const SteadyState& ss,
                                  const LinearCoeffs& lc);
};

/// Velocity deviations commanded at the outlet (added to v_i*).
struct VslCommand {
  double u_slow = 0.0;
  double u_fast = 0.0;
  bool saturated_slow = false;
  bool saturated_fast = false;
};

/// Full-state boundary feedback: evaluates the two kernel quadratures over
/// the current deviation field.  Cell-centered composite quadrature on the
/// simulation grid with kernel outlet-edge values interpolated linearly.
VslCommand full_state_vsl(const TrafficField& f, const ModelParams& params,
                          const SteadyState& ss, const LinearCoeffs& lc,
                          const KernelSet& ks);

/// Outlet density measurement from a physical field plus the Riemann
/// reconstruction using the applied command.
Measurement measure_outlet(const TrafficField& f, const ModelParams& params,
                           const SteadyState& ss, const VslCommand& applied);

/// Same measurement taken from a plant evolving in characteristic variables.
/// Shares the pointwise reconstruction code with the observer's predicted
/// output, so a truth-initialized observer sees an exactly zero innovation.
Measurement measure_outlet_char(const CharField& f, const ModelParams& params,
                                const SteadyState& ss, const LinearCoeffs& lc,
                                const VslCommand& applied);

/// One explicit step of the observer: a copy of the scaled plant driven by
/// the applied command plus output injection of the measurement innovation.
ObserverState observer_step(const ObserverState& est, const Measurement& meas,
                            const VslCommand& applied,
                            const ModelParams& params, const SteadyState& ss,
                            const LinearCoeffs& lc,
                            const ObserverKernelSet& oks, double dt);

/// Physical-variable view of the observer state (absolute rho and v).
TrafficField estimates_to_physical(const ObserverState& est,
                                   const ModelParams& params,
                                   const SteadyState& ss,
                                   const LinearCoeffs& lc);

/// Output feedback: the full-state law evaluated on the physical view of
/// the estimates (identical code path, hence bitwise-consistent when the
/// estimates equal the true state).
VslCommand output_feedback_vsl(const ObserverState& est,
                               const ModelParams& params,
                               const SteadyState& ss, const LinearCoeffs& lc,
                               const KernelSet& ks);

/// Clamps both components to |u| <= bound_mps and flags the clamped ones.
/// A non-positive bound disables saturation (the default).
VslCommand saturate_command(const VslCommand& cmd, double bound_mps);

}  // namespace twolane

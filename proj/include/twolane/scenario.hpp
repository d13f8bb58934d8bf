// SPDX-License-Identifier: Apache-2.0
/// \file scenario.hpp
/// \brief Initial-condition construction for the two traffic scenarios.

#pragma once

#include "twolane/config.hpp"
#include "twolane/field.hpp"
#include "twolane/model.hpp"

namespace twolane {

/// Builds the initial field for the configured scenario on \p grid.
///
/// stop_and_go:  rho_i = rho_i* (1 + a sin(2 pi k x / L)),
///               v_i   = v_i*   (1 - a sin(2 pi k x / L)).
/// bottleneck:   smooth tanh front of the configured width centered at the
///               configured position; the slow lane is denser and slower
///               downstream of the front, the fast lane carries a dense
///               pulse entering at the inlet.  ic_amplitude scales the
///               front/pulse strengths relative to their defaults at 0.1.
///
/// Throws Error(config) when the requested amplitudes push any state out of
/// (0, rho_max_i) x (0, v_max).
TrafficField make_initial_condition(const ScenarioConfig& cfg,
                                    const ModelParams& params,
                                    const SteadyState& ss, const Grid& grid);

}  // namespace twolane

// SPDX-License-Identifier: Apache-2.0
/// \file field.hpp
/// \brief Spatial grids, state fields, and the coordinate transforms between
///        physical and characteristic variables.

#pragma once

#include <vector>

#include "twolane/errors.hpp"
#include "twolane/linearize.hpp"
#include "twolane/model.hpp"

namespace twolane {

/// Uniform finite-volume grid over [0, L]; states live at cell centers.
struct Grid {
  int n_cells = 0;
  double dx = 0.0;
  double length = 0.0;
  std::vector<double> centers;  ///< x_j = (j + 1/2) dx, j = 0..n_cells-1

  /// Builds a uniform grid; throws Error(config) for n_cells < 8.
  static Grid uniform(double length, int n_cells);

  bool operator==(const Grid& other) const {
    return n_cells == other.n_cells && dx == other.dx &&
           length == other.length;
  }
};

/// Physical state: per-lane density (veh/m) and speed (m/s) at cell centers.
struct TrafficField {
  Grid grid;
  std::vector<double> rho_slow;
  std::vector<double> v_slow;
  std::vector<double> rho_fast;
  std::vector<double> v_fast;

  static TrafficField zeros(const Grid& grid);
  /// Field holding the uniform steady state everywhere.
  static TrafficField uniform_steady(const Grid& grid, const SteadyState& ss);
};

/// Characteristic state of the linearized dynamics: downstream-travelling
/// w~_i and rescaled upstream-travelling vbar_i at cell centers.
struct CharField {
  Grid grid;
  std::vector<double> w_slow;
  std::vector<double> w_fast;
  std::vector<double> vbar_slow;
  std::vector<double> vbar_fast;

  static CharField zeros(const Grid& grid);
};

/// Pointwise forward transform at position x:
///   w~_i = (gamma p*_i / rho*_i) rho~_i + v~_i,  vbar_i = e^{rate_i x} v~_i.
struct CharPoint {
  double w = 0.0;
  double vbar = 0.0;
};
CharPoint physical_to_characteristic_point(int lane, double x,
                                           double rho_deviation,
                                           double v_deviation,
                                           const ModelParams& params,
                                           const SteadyState& ss,
                                           const LinearCoeffs& lc);

/// Pointwise inverse transform at position x:
///   v~_i = e^{-rate_i x} vbar_i,  rho~_i = (rho*_i / gamma p*_i)(w~_i - v~_i).
struct PhysPoint {
  double rho_deviation = 0.0;
  double v_deviation = 0.0;
};
PhysPoint characteristic_to_physical_point(int lane, double x, double w,
                                           double vbar,
                                           const ModelParams& params,
                                           const SteadyState& ss,
                                           const LinearCoeffs& lc);

/// Whole-field forward transform; deviations are taken against \p ss.
CharField physical_to_characteristic(const TrafficField& field,
                                     const ModelParams& params,
                                     const SteadyState& ss,
                                     const LinearCoeffs& lc);

/// Whole-field inverse transform; absolute physical values are rebuilt by
/// adding the steady state.
TrafficField characteristic_to_physical(const CharField& cf,
                                        const ModelParams& params,
                                        const SteadyState& ss,
                                        const LinearCoeffs& lc);

/// Dimensionless L2 deviation norms relative to the steady state:
/// per lane sqrt(mean((rho~/rho*)^2) + mean((v~/v*)^2)); combined lanes in
/// quadrature.
struct DeviationNorm {
  double slow = 0.0;
  double fast = 0.0;
  double combined = 0.0;
};
DeviationNorm deviation_norm(const TrafficField& field, const SteadyState& ss);

/// Same norm applied to the difference between two fields on one grid
/// (used for estimation errors).
DeviationNorm difference_norm(const TrafficField& a, const TrafficField& b,
                              const SteadyState& ss);

}  // namespace twolane

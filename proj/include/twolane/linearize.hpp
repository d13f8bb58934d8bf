// SPDX-License-Identifier: Apache-2.0
/// \file linearize.hpp
/// \brief Linearization of the two-lane model about a congested steady state.
///
/// Deviations from the steady state are written in two coordinate layers:
///  * physical deviations (rho~_i, v~_i);
///  * characteristic coordinates (w~_i, v~_i) with w~_i = (gamma p*_i /
///    rho*_i) rho~_i + v~_i, which diagonalize the transport part; and
///  * the exponentially rescaled speed coordinates vbar_i =
///    exp(a^vv_ii x / mu_i) v~_i that remove the diagonal in-domain coupling.
///
/// w~_i travels downstream with speed eps_i = v*_i; vbar_i travels upstream
/// with speed mu_i = gamma p*_i - v*_i.  The congested regime orders the
/// speeds as -mu_1 < -mu_2 < 0 < eps_1 < eps_2 (slow lane = index 1).

#pragma once

#include "twolane/errors.hpp"
#include "twolane/model.hpp"

namespace twolane {

/// Dense 2x2 coefficient block; m[i][j] couples equation i to lane j
/// (index 0 = slow lane, 1 = fast lane).
struct Mat2 {
  double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

/// Constant coefficients of the linearized dynamics plus the evaluators of
/// their exponentially rescaled in-domain forms.
struct LinearCoeffs {
  // Source blocks of the (w~, v~) system, all entries in 1/s.  Block X-Y
  // couples the X equations to the Y variables.
  Mat2 a_ww;
  Mat2 a_wv;
  Mat2 a_vw;
  Mat2 a_vv;

  double eps1 = 0.0;  ///< downstream speed of w~_slow (m/s), = v*_slow
  double eps2 = 0.0;  ///< downstream speed of w~_fast (m/s), = v*_fast
  double mu1 = 0.0;   ///< upstream speed of v~_slow (m/s), = gamma p*_s - v*_s
  double mu2 = 0.0;   ///< upstream speed of v~_fast (m/s), = gamma p*_f - v*_f

  double k_slow = 0.0;  ///< inlet reflection w~_s(0) = k_slow vbar_s(0)
  double k_fast = 0.0;  ///< inlet reflection w~_f(0) = k_fast vbar_f(0)
  double l_slow = 0.0;  ///< outlet scaling vbar_s(L) = l_slow * u_slow
  double l_fast = 0.0;  ///< outlet scaling vbar_f(L) = l_fast * u_fast

  double seg_length = 0.0;  ///< L (m)

  /// Decay rates of the rescaling exponents: rate_i = a^vv_ii / mu_i (1/m).
  double rate1() const { return a_vv.m[0][0] / mu1; }
  double rate2() const { return a_vv.m[1][1] / mu2; }

  /// exp(+a^vv_ii x / mu_i): multiplies v~_i to produce vbar_i.
  double scale_to_vbar(int lane, double x) const;
  /// exp(-a^vv_ii x / mu_i): multiplies vbar_i to recover v~_i.
  double scale_from_vbar(int lane, double x) const;

  /// Rescaled source blocks of the (w~, vbar) system at position x.
  Mat2 abar_ww() const { return a_ww; }
  Mat2 abar_wv(double x) const;  ///< column j scaled by exp(-a^vv_jj x/mu_j)
  Mat2 abar_vw(double x) const;  ///< column j scaled by exp(+a^vv_jj x/mu_j)
  Mat2 abar_vv(double x) const;  ///< zero diagonal; off-diagonal rescaled
};

/// Builds the linearized coefficients about \p ss.  Throws Error(domain)
/// unless the steady state is congested on both lanes and the characteristic
/// speeds obey the strict ordering 0 < eps1 < eps2 and 0 < mu2 < mu1 assumed
/// by the boundary-control design.
LinearCoeffs linearize(const ModelParams& params, const SteadyState& ss);

}  // namespace twolane

// SPDX-License-Identifier: Apache-2.0
/// \file linearize.cpp
/// \brief Closed-form coefficients of the linearized two-lane dynamics.

#include "twolane/linearize.hpp"

#include <cmath>

namespace twolane {

double LinearCoeffs::scale_to_vbar(int lane, double x) const {
  return std::exp((lane == 0 ? rate1() : rate2()) * x);
}

double LinearCoeffs::scale_from_vbar(int lane, double x) const {
  return std::exp(-(lane == 0 ? rate1() : rate2()) * x);
}

Mat2 LinearCoeffs::abar_wv(double x) const {
  const double c1 = std::exp(-rate1() * x);
  const double c2 = std::exp(-rate2() * x);
  Mat2 r;
  r.m[0][0] = a_wv.m[0][0] * c1;
  r.m[0][1] = a_wv.m[0][1] * c2;
  r.m[1][0] = a_wv.m[1][0] * c1;
  r.m[1][1] = a_wv.m[1][1] * c2;
  return r;
}

Mat2 LinearCoeffs::abar_vw(double x) const {
  const double c1 = std::exp(rate1() * x);
  const double c2 = std::exp(rate2() * x);
  Mat2 r;
  r.m[0][0] = a_vw.m[0][0] * c1;
  r.m[0][1] = a_vw.m[0][1] * c1;
  r.m[1][0] = a_vw.m[1][0] * c2;
  r.m[1][1] = a_vw.m[1][1] * c2;
  return r;
}

Mat2 LinearCoeffs::abar_vv(double x) const {
  // The rescaling cancels the diagonal exactly; the off-diagonal entries
  // pick up the difference of the two rescaling exponents.
  const double d = (rate1() - rate2()) * x;
  Mat2 r;
  r.m[0][0] = 0.0;
  r.m[1][1] = 0.0;
  r.m[0][1] = a_vv.m[0][1] * std::exp(d);
  r.m[1][0] = a_vv.m[1][0] * std::exp(-d);
  return r;
}

LinearCoeffs linearize(const ModelParams& params, const SteadyState& ss) {
  params.validate();
  const double gps = params.gamma * ss.p_star_slow;  // gamma p*_slow (m/s)
  const double gpf = params.gamma * ss.p_star_fast;  // gamma p*_fast (m/s)
  const double vs = ss.v_star_slow;
  const double vf = ss.v_star_fast;
  if (!(vs < gps) || !(vf < gpf)) {
    throw Error(ErrorKind::domain,
                "linearize: steady state is not congested on both lanes");
  }

  LinearCoeffs lc;
  lc.seg_length = params.seg_length;
  lc.eps1 = vs;
  lc.eps2 = vf;
  lc.mu1 = gps - vs;
  lc.mu2 = gpf - vf;
  if (!(lc.eps1 > 0.0) || !(lc.eps1 < lc.eps2) || !(lc.mu2 > 0.0) ||
      !(lc.mu2 < lc.mu1)) {
    throw Error(ErrorKind::domain,
                "linearize: characteristic speeds violate the ordering "
                "0 < eps1 < eps2 and 0 < mu2 < mu1 required by the design");
  }

  const double ts = params.t_pref_slow;
  const double tf = params.t_pref_fast;
  const double tse = params.t_relax_slow;
  const double tfe = params.t_relax_fast;
  const double dv = vf - vs;  // fast minus slow steady speed (m/s)

  // Sources of the w~ equations.
  lc.a_ww.m[0][0] = -1.0 / tse - (dv + gps) / (ts * gps);
  lc.a_ww.m[0][1] = (dv + gps) / (ts * gpf);
  lc.a_ww.m[1][0] = (-dv + gpf) / (tf * gps);
  lc.a_ww.m[1][1] = -1.0 / tfe - (-dv + gpf) / (tf * gpf);

  lc.a_wv.m[0][0] = dv / (ts * gps);
  lc.a_wv.m[0][1] = -((gps - vs) - (gpf - vf)) / (ts * gpf);
  lc.a_wv.m[1][0] = -((gpf - vf) - (gps - vs)) / (tf * gps);
  lc.a_wv.m[1][1] = -dv / (tf * gpf);

  // Sources of the v~ equations.
  lc.a_vw.m[0][0] = -1.0 / tse - dv / (ts * gps);
  lc.a_vw.m[0][1] = dv / (ts * gpf);
  lc.a_vw.m[1][0] = -dv / (tf * gps);
  lc.a_vw.m[1][1] = -1.0 / tfe + dv / (tf * gpf);

  lc.a_vv.m[0][0] = (dv - gps) / (ts * gps);
  lc.a_vv.m[0][1] = -(dv - gpf) / (ts * gpf);
  lc.a_vv.m[1][0] = (dv + gps) / (tf * gps);
  lc.a_vv.m[1][1] = (dv + gpf) / (tf * gpf);

  // Inlet reflection (constant-flow inlet) and outlet rescaling constants.
  lc.k_slow = -lc.mu1 / lc.eps1;
  lc.k_fast = -lc.mu2 / lc.eps2;
  lc.l_slow = std::exp(lc.a_vv.m[0][0] * params.seg_length / lc.mu1);
  lc.l_fast = std::exp(lc.a_vv.m[1][1] * params.seg_length / lc.mu2);
  return lc;
}

}  // namespace twolane

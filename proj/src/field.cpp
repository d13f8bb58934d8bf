// SPDX-License-Identifier: Apache-2.0
/// \file field.cpp
/// \brief Grids, state fields, and physical/characteristic transforms.

#include "twolane/field.hpp"

#include <cmath>

namespace twolane {

Grid Grid::uniform(double length, int n_cells) {
  if (!(length > 0.0)) {
    throw Error(ErrorKind::config, "grid: length must be positive");
  }
  if (n_cells < 8) {
    throw Error(ErrorKind::config, "grid: need at least 8 cells");
  }
  Grid g;
  g.n_cells = n_cells;
  g.length = length;
  g.dx = length / static_cast<double>(n_cells);
  g.centers.resize(static_cast<std::size_t>(n_cells));
  for (int j = 0; j < n_cells; ++j) {
    g.centers[static_cast<std::size_t>(j)] =
        (static_cast<double>(j) + 0.5) * g.dx;
  }
  return g;
}

TrafficField TrafficField::zeros(const Grid& grid) {
  TrafficField f;
  f.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid.n_cells);
  f.rho_slow.assign(n, 0.0);
  f.v_slow.assign(n, 0.0);
  f.rho_fast.assign(n, 0.0);
  f.v_fast.assign(n, 0.0);
  return f;
}

TrafficField TrafficField::uniform_steady(const Grid& grid,
                                          const SteadyState& ss) {
  TrafficField f;
  f.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid.n_cells);
  f.rho_slow.assign(n, ss.rho_star_slow);
  f.v_slow.assign(n, ss.v_star_slow);
  f.rho_fast.assign(n, ss.rho_star_fast);
  f.v_fast.assign(n, ss.v_star_fast);
  return f;
}

CharField CharField::zeros(const Grid& grid) {
  CharField c;
  c.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid.n_cells);
  c.w_slow.assign(n, 0.0);
  c.w_fast.assign(n, 0.0);
  c.vbar_slow.assign(n, 0.0);
  c.vbar_fast.assign(n, 0.0);
  return c;
}

CharPoint physical_to_characteristic_point(int lane, double x,
                                           double rho_deviation,
                                           double v_deviation,
                                           const ModelParams& params,
                                           const SteadyState& ss,
                                           const LinearCoeffs& lc) {
  const double gp =
      params.gamma * (lane == 0 ? ss.p_star_slow : ss.p_star_fast);
  const double rho_star = lane == 0 ? ss.rho_star_slow : ss.rho_star_fast;
  CharPoint cp;
  cp.w = (gp / rho_star) * rho_deviation + v_deviation;
  cp.vbar = lc.scale_to_vbar(lane, x) * v_deviation;
  return cp;
}

PhysPoint characteristic_to_physical_point(int lane, double x, double w,
                                           double vbar,
                                           const ModelParams& params,
                                           const SteadyState& ss,
                                           const LinearCoeffs& lc) {
  const double gp =
      params.gamma * (lane == 0 ? ss.p_star_slow : ss.p_star_fast);
  const double rho_star = lane == 0 ? ss.rho_star_slow : ss.rho_star_fast;
  PhysPoint pp;
  pp.v_deviation = lc.scale_from_vbar(lane, x) * vbar;
  pp.rho_deviation = (rho_star / gp) * (w - pp.v_deviation);
  return pp;
}

CharField physical_to_characteristic(const TrafficField& field,
                                     const ModelParams& params,
                                     const SteadyState& ss,
                                     const LinearCoeffs& lc) {
  CharField cf = CharField::zeros(field.grid);
  for (int j = 0; j < field.grid.n_cells; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const double x = field.grid.centers[js];
    const CharPoint s = physical_to_characteristic_point(
        0, x, field.rho_slow[js] - ss.rho_star_slow,
        field.v_slow[js] - ss.v_star_slow, params, ss, lc);
    const CharPoint f = physical_to_characteristic_point(
        1, x, field.rho_fast[js] - ss.rho_star_fast,
        field.v_fast[js] - ss.v_star_fast, params, ss, lc);
    cf.w_slow[js] = s.w;
    cf.vbar_slow[js] = s.vbar;
    cf.w_fast[js] = f.w;
    cf.vbar_fast[js] = f.vbar;
  }
  return cf;
}

TrafficField characteristic_to_physical(const CharField& cf,
                                        const ModelParams& params,
                                        const SteadyState& ss,
                                        const LinearCoeffs& lc) {
  TrafficField f = TrafficField::zeros(cf.grid);
  for (int j = 0; j < cf.grid.n_cells; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const double x = cf.grid.centers[js];
    const PhysPoint s = characteristic_to_physical_point(
        0, x, cf.w_slow[js], cf.vbar_slow[js], params, ss, lc);
    const PhysPoint ff = characteristic_to_physical_point(
        1, x, cf.w_fast[js], cf.vbar_fast[js], params, ss, lc);
    f.rho_slow[js] = ss.rho_star_slow + s.rho_deviation;
    f.v_slow[js] = ss.v_star_slow + s.v_deviation;
    f.rho_fast[js] = ss.rho_star_fast + ff.rho_deviation;
    f.v_fast[js] = ss.v_star_fast + ff.v_deviation;
  }
  return f;
}

namespace {

DeviationNorm norm_from_deviations(const std::vector<double>& drs,
                                   const std::vector<double>& dvs,
                                   const std::vector<double>& drf,
                                   const std::vector<double>& dvf,
                                   const SteadyState& ss) {
  auto mean_sq = [](const std::vector<double>& dev, double scale) {
    double acc = 0.0;
    for (double d : dev) {
      const double r = d / scale;
      acc += r * r;
    }
    return dev.empty() ? 0.0 : acc / static_cast<double>(dev.size());
  };
  DeviationNorm n;
  const double s2 =
      mean_sq(drs, ss.rho_star_slow) + mean_sq(dvs, ss.v_star_slow);
  const double f2 =
      mean_sq(drf, ss.rho_star_fast) + mean_sq(dvf, ss.v_star_fast);
  n.slow = std::sqrt(s2);
  n.fast = std::sqrt(f2);
  n.combined = std::sqrt(s2 + f2);
  return n;
}

}  // namespace

DeviationNorm deviation_norm(const TrafficField& field,
                             const SteadyState& ss) {
  const std::size_t n = field.rho_slow.size();
  std::vector<double> drs(n), dvs(n), drf(n), dvf(n);
  for (std::size_t j = 0; j < n; ++j) {
    drs[j] = field.rho_slow[j] - ss.rho_star_slow;
    dvs[j] = field.v_slow[j] - ss.v_star_slow;
    drf[j] = field.rho_fast[j] - ss.rho_star_fast;
    dvf[j] = field.v_fast[j] - ss.v_star_fast;
  }
  return norm_from_deviations(drs, dvs, drf, dvf, ss);
}

DeviationNorm difference_norm(const TrafficField& a, const TrafficField& b,
                              const SteadyState& ss) {
  if (!(a.grid == b.grid)) {
    throw Error(ErrorKind::domain, "difference_norm: grids differ");
  }
  const std::size_t n = a.rho_slow.size();
  std::vector<double> drs(n), dvs(n), drf(n), dvf(n);
  for (std::size_t j = 0; j < n; ++j) {
    drs[j] = a.rho_slow[j] - b.rho_slow[j];
    dvs[j] = a.v_slow[j] - b.v_slow[j];
    drf[j] = a.rho_fast[j] - b.rho_fast[j];
    dvf[j] = a.v_fast[j] - b.v_fast[j];
  }
  return norm_from_deviations(drs, dvs, drf, dvf, ss);
}

}  // namespace twolane

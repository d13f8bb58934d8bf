// SPDX-License-Identifier: Apache-2.0
/// \file scenario.cpp

#include "twolane/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace twolane {

namespace {

void check_bounds(const TrafficField& f, const ModelParams& params,
                  const SteadyState& ss) {
  struct LaneRef {
    const std::vector<double>& rho;
    const std::vector<double>& v;
    double rho_max;
    const char* name;
  };
  const LaneRef lanes[2] = {
      {f.rho_slow, f.v_slow, ss.rho_max_slow, "slow"},
      {f.rho_fast, f.v_fast, ss.rho_max_fast, "fast"},
  };
  for (const LaneRef& lane : lanes) {
    for (std::size_t j = 0; j < lane.rho.size(); ++j) {
      if (!(lane.rho[j] > 0.0) || !(lane.rho[j] < lane.rho_max)) {
        throw Error(ErrorKind::config,
                    std::string("initial condition: ") + lane.name +
                        "-lane density leaves (0, rho_max) at cell " +
                        std::to_string(j) +
                        "; reduce ic_amplitude or widen the bounds");
      }
      if (!(lane.v[j] > 0.0) || !(lane.v[j] < params.v_max)) {
        throw Error(ErrorKind::config,
                    std::string("initial condition: ") + lane.name +
                        "-lane speed leaves (0, v_max) at cell " +
                        std::to_string(j) +
                        "; reduce ic_amplitude or widen the bounds");
      }
    }
  }
}

}  // namespace

TrafficField make_initial_condition(const ScenarioConfig& cfg,
                                    const ModelParams& params,
                                    const SteadyState& ss, const Grid& grid) {
  TrafficField f = TrafficField::uniform_steady(grid, ss);
  const double L = grid.length;
  const double a = cfg.ic_amplitude;

  if (cfg.scenario == ScenarioKind::stop_and_go) {
    const double k = static_cast<double>(cfg.ic_wavenumber);
    for (int j = 0; j < grid.n_cells; ++j) {
      const double s =
          std::sin(2.0 * std::numbers::pi * k * grid.centers[j] / L);
      f.rho_slow[j] = ss.rho_star_slow * (1.0 + a * s);
      f.rho_fast[j] = ss.rho_star_fast * (1.0 + a * s);
      f.v_slow[j] = ss.v_star_slow * (1.0 - a * s);
      f.v_fast[j] = ss.v_star_fast * (1.0 - a * s);
    }
  } else {
    // Front/pulse strengths at the reference amplitude 0.1: downstream
    // slow-lane density +25%, upstream -10%, fast-lane inlet pulse +20%.
    const double scale = a / 0.1;
    const double width = cfg.shock_width * L;
    const double center = cfg.shock_position * L;
    for (int j = 0; j < grid.n_cells; ++j) {
      const double x = grid.centers[j];
      const double front = 0.5 * (1.0 + std::tanh((x - center) / width));
      const double pulse = std::exp(-(x / width) * (x / width));
      f.rho_slow[j] =
          ss.rho_star_slow * (1.0 - 0.10 * scale + 0.35 * scale * front);
      f.rho_fast[j] = ss.rho_star_fast * (1.0 + 0.20 * scale * pulse);
      f.v_slow[j] =
          ss.v_star_slow * (2.0 - f.rho_slow[j] / ss.rho_star_slow);
      f.v_fast[j] =
          ss.v_star_fast * (2.0 - f.rho_fast[j] / ss.rho_star_fast);
    }
  }

  check_bounds(f, params, ss);
  return f;
}

}  // namespace twolane

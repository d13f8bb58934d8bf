// SPDX-License-Identifier: Apache-2.0
/// \file runner.cpp

#include "twolane/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "twolane/control.hpp"
#include "twolane/kernels.hpp"
#include "twolane/scenario.hpp"
#include "twolane/sim.hpp"
#include "twolane/version.hpp"

namespace twolane {

namespace {

/// Re-throws component errors with the failing stage named.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("run_scenario[") + name + "]: " +
                              e.what());
  }
}

double convergence_time_from(const std::vector<double>& times,
                             const std::vector<double>& combined,
                             double level) {
  // Last recorded index at or above the level; convergence starts after it.
  std::size_t last_above = times.size();  // sentinel: none above
  for (std::size_t i = times.size(); i-- > 0;) {
    if (!(combined[i] < level)) {
      last_above = i;
      break;
    }
  }
  if (last_above == times.size()) return times.front();
  if (last_above + 1 >= times.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return times[last_above + 1];
}

}  // namespace

AnalyticBounds analytic_bounds(const LinearCoeffs& lc) {
  const double L = lc.seg_length;
  AnalyticBounds b;
  b.t_f = L / lc.eps1 + L / lc.mu2 + L / lc.mu1;
  b.t_o = L / lc.eps1 + L / lc.eps2 + L / lc.mu2;
  b.t_out = b.t_o + b.t_f;
  return b;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();

  const ModelParams params = stage("model", [&] { return cfg.model_params(); });
  const SteadyState ss =
      stage("steady", [&] { return cfg.resolve_steady(params); });
  const LinearCoeffs lc = stage("linearize", [&] { return linearize(params, ss); });
  const AnalyticBounds bounds = analytic_bounds(lc);

  const Grid grid = Grid::uniform(params.seg_length, cfg.n_cells);
  const TrafficField ic = stage(
      "scenario", [&] { return make_initial_condition(cfg, params, ss, grid); });

  const bool need_control =
      cfg.mode == RunMode::full_state || cfg.mode == RunMode::output_feedback;
  const bool need_observer =
      cfg.mode == RunMode::observer || cfg.mode == RunMode::output_feedback;
  const bool linear_plant = cfg.plant == PlantKind::linearized;

  SolveOptions sopt;
  sopt.tol = cfg.kernel_tol;
  KernelSet ks;
  ObserverKernelSet oks;
  if (need_control || need_observer) {
    const TriMesh mesh = TriMesh::make(params.seg_length, cfg.kernel_n);
    if (need_control) {
      ks = stage("control_kernels", [&] {
        return solve_control_kernels_cached(lc, mesh, sopt,
                                            cfg.kernel_cache_dir);
      });
    }
    if (need_observer) {
      oks = stage("observer_kernels", [&] {
        return solve_observer_kernels_cached(lc, mesh, sopt,
                                             cfg.kernel_cache_dir);
      });
    }
  }

  // Plant state: characteristic variables for the linearized plant,
  // physical variables for the nonlinear one.
  CharField s_char;
  TrafficField s_phys;
  if (linear_plant) {
    s_char = physical_to_characteristic(ic, params, ss, lc);
  } else {
    s_phys = ic;
  }
  ObserverState est;
  if (need_observer) {
    est = cfg.observer_init == ObserverInit::truth
              ? ObserverState::from_truth(ic, params, ss, lc)
              : ObserverState::zeros(grid);
  }

  std::mt19937_64 rng(cfg.noise_seed);
  std::uniform_real_distribution<double> noise(-cfg.noise_amplitude_mps,
                                               cfg.noise_amplitude_mps);

  RunResult result;
  Trace& trace = result.trace;
  Metrics& metrics = result.metrics;
  trace.grid = grid;
  trace.mode = to_string(cfg.mode);
  trace.plant = to_string(cfg.plant);
  trace.scenario = to_string(cfg.scenario);
  trace.steady_mode = to_string(cfg.steady_mode);
  trace.scheme = linear_plant ? "upwind" : "lax_friedrichs";
  trace.version = kVersion;
  trace.config_hash = config_hash(cfg);
  trace.has_estimates = need_observer;
  metrics.t_f = bounds.t_f;
  metrics.t_o = bounds.t_o;
  metrics.t_out = bounds.t_out;
  metrics.threshold_fraction = cfg.effective_threshold();

  VslCommand applied;  // one-step hold: zero during the first step
  const double t_end = cfg.t_end_s;
  const double dt_linear = cfl_dt(grid, lc, cfg.cfl);
  const double obs_speed = std::max(lc.eps2, lc.mu1);
  double t = 0.0;
  long step_index = 0;

  auto plant_physical = [&]() {
    return linear_plant ? characteristic_to_physical(s_char, params, ss, lc)
                        : s_phys;
  };

  auto record = [&](double time) {
    const TrafficField phys = plant_physical();
    trace.times.push_back(time);
    trace.rho_slow.push_back(phys.rho_slow);
    trace.v_slow.push_back(phys.v_slow);
    trace.rho_fast.push_back(phys.rho_fast);
    trace.v_fast.push_back(phys.v_fast);
    trace.cmd_slow.push_back(applied.u_slow);
    trace.cmd_fast.push_back(applied.u_fast);
    const DeviationNorm dn = deviation_norm(phys, ss);
    metrics.deviation.slow.push_back(dn.slow);
    metrics.deviation.fast.push_back(dn.fast);
    metrics.deviation.combined.push_back(dn.combined);
    if (need_observer) {
      const TrafficField est_phys = estimates_to_physical(est, params, ss, lc);
      trace.rho_slow_est.push_back(est_phys.rho_slow);
      trace.v_slow_est.push_back(est_phys.v_slow);
      trace.rho_fast_est.push_back(est_phys.rho_fast);
      trace.v_fast_est.push_back(est_phys.v_fast);
      const DeviationNorm en = difference_norm(est_phys, phys, ss);
      metrics.estimation_error.slow.push_back(en.slow);
      metrics.estimation_error.fast.push_back(en.fast);
      metrics.estimation_error.combined.push_back(en.combined);
    }
  };

  stage("loop", [&] {
    while (t_end - t > 1e-9) {
      double dt = dt_linear;
      if (!linear_plant) {
        double speed = max_wave_speed(s_phys, params, ss);
        if (need_observer) speed = std::max(speed, obs_speed);
        dt = cfg.cfl * grid.dx / speed;
      }
      dt = std::min(dt, t_end - t);

      if (step_index % cfg.record_every == 0) record(t);

      Measurement meas =
          linear_plant ? measure_outlet_char(s_char, params, ss, lc, applied)
                       : measure_outlet(s_phys, params, ss, applied);
      if (cfg.noise_amplitude_mps > 0.0) {
        meas.yy_slow += noise(rng);
        meas.yy_fast += noise(rng);
      }

      VslCommand cmd;
      if (cfg.mode == RunMode::full_state) {
        cmd = full_state_vsl(plant_physical(), params, ss, lc, ks);
      } else if (cfg.mode == RunMode::output_feedback) {
        cmd = output_feedback_vsl(est, params, ss, lc, ks);
      }
      cmd = saturate_command(cmd, cfg.saturation_bound_mps);
      if (cmd.saturated_slow || cmd.saturated_fast) ++metrics.saturated_steps;

      BoundaryInput input;
      input.u_slow = applied.u_slow;
      input.u_fast = applied.u_fast;
      if (linear_plant) {
        s_char = step_linear(s_char, input, lc, dt);
      } else {
        s_phys = step_nonlinear(s_phys, input, params, ss, dt);
      }
      if (need_observer) {
        est = observer_step(est, meas, applied, params, ss, lc, oks, dt);
      }

      applied = cmd;
      t += dt;
      ++step_index;
    }
    return 0;
  });
  record(t_end);

  metrics.initial_deviation = metrics.deviation.combined.front();
  if (need_observer) {
    metrics.initial_estimation_error =
        metrics.estimation_error.combined.front();
  }
  const double level = metrics.threshold_fraction * metrics.initial_deviation;
  metrics.convergence_time =
      convergence_time_from(trace.times, metrics.deviation.combined, level);
  return result;
}

}  // namespace twolane

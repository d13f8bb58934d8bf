// SPDX-License-Identifier: Apache-2.0
/// \file main.cpp
/// \brief Command-line front end: steady / linearize / kernels / simulate /
///        fundamental-diagram.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "twolane/config.hpp"
#include "twolane/control.hpp"
#include "twolane/kernels.hpp"
#include "twolane/linearize.hpp"
#include "twolane/model.hpp"
#include "twolane/runner.hpp"
#include "twolane/trace_io.hpp"
#include "twolane/units.hpp"
#include "twolane/version.hpp"

namespace {

using namespace twolane;

ScenarioConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    ScenarioConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(path);
}

void emit_error_json(const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

void print_steady(const ScenarioConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const SteadyState ss = cfg.resolve_steady(params);
  std::printf("steady state  (mode = %s)\n", to_string(cfg.steady_mode));
  std::printf("  sigma (t_pref_fast / t_pref_slow)   %.12g\n", ss.sigma);
  std::printf("  speed-reduction factors r_s / r_f   %.12g / %.12g\n",
              ss.r_slow, ss.r_fast);
  std::printf("  rho*    slow / fast   %.12g / %.12g veh/km\n",
              vehm_to_vehkm(ss.rho_star_slow), vehm_to_vehkm(ss.rho_star_fast));
  std::printf("  v*      slow / fast   %.12g / %.12g km/h\n",
              ms_to_kmh(ss.v_star_slow), ms_to_kmh(ss.v_star_fast));
  std::printf("  p*      slow / fast   %.12g / %.12g km/h\n",
              ms_to_kmh(ss.p_star_slow), ms_to_kmh(ss.p_star_fast));
  std::printf("  q*      slow / fast   %.12g / %.12g veh/h\n",
              vehs_to_vehh(ss.q_star_slow), vehs_to_vehh(ss.q_star_fast));
  std::printf("  rho_max slow / fast   %.12g / %.12g veh/km\n",
              vehm_to_vehkm(ss.rho_max_slow), vehm_to_vehkm(ss.rho_max_fast));
  std::printf("  congested regime      %s\n", ss.congested ? "yes" : "no");
  std::printf(
      "  balance residuals (relative): mass %.3e, momentum slow %.3e, "
      "momentum fast %.3e (max %.3e)\n",
      ss.residuals.mass, ss.residuals.momentum_slow,
      ss.residuals.momentum_fast, ss.residuals.max_abs());
}

void print_mat(const char* name, const Mat2& m) {
  std::printf("  %-6s [ %+.9e  %+.9e ]\n", name, m.m[0][0], m.m[0][1]);
  std::printf("  %-6s [ %+.9e  %+.9e ]  (1/s)\n", "", m.m[1][0], m.m[1][1]);
}

void print_linearize(const ScenarioConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const SteadyState ss = cfg.resolve_steady(params);
  const LinearCoeffs lc = linearize(params, ss);
  std::printf("linearized coefficients at the steady state\n");
  print_mat("a_ww", lc.a_ww);
  print_mat("a_wv", lc.a_wv);
  print_mat("a_vw", lc.a_vw);
  print_mat("a_vv", lc.a_vv);
  std::printf("  characteristic speeds (m/s): eps1 %.9g, eps2 %.9g, mu1 %.9g, "
              "mu2 %.9g\n",
              lc.eps1, lc.eps2, lc.mu1, lc.mu2);
  std::printf("  ordering -mu1 < -mu2 < 0 < eps1 < eps2: %s\n",
              (-lc.mu1 < -lc.mu2 && lc.mu2 > 0.0 && lc.eps1 > 0.0 &&
               lc.eps1 < lc.eps2)
                  ? "satisfied"
                  : "VIOLATED");
  std::printf("  inlet reflection k_s %.9g, k_f %.9g\n", lc.k_slow, lc.k_fast);
  std::printf("  outlet scaling   l_s %.9g, l_f %.9g\n", lc.l_slow, lc.l_fast);
  const AnalyticBounds b = analytic_bounds(lc);
  std::printf("  horizons (s): t_f %.6f, t_o %.6f, t_out %.6f\n", b.t_f, b.t_o,
              b.t_out);
}

void print_residuals(const char* family, const SolveStats& stats,
                     const ResidualReport& report) {
  std::printf("%s kernels: converged in %d sweeps\n", family,
              stats.iterations);
  for (const EquationResidual& eq : report.equations) {
    std::printf("  %-4s  max %.3e  rms %.3e  (%d interior nodes)\n",
                eq.name.c_str(), eq.max_abs, eq.rms, eq.nodes);
  }
  std::printf("  interior max %.3e, boundary max %.3e\n", report.interior_max,
              report.boundary_max);
}

int run_kernels(const ScenarioConfig& cfg, const std::string& family) {
  const ModelParams params = cfg.model_params();
  const SteadyState ss = cfg.resolve_steady(params);
  const LinearCoeffs lc = linearize(params, ss);
  const TriMesh mesh = TriMesh::make(params.seg_length, cfg.kernel_n);
  SolveOptions opt;
  opt.tol = cfg.kernel_tol;
  std::printf("kernel mesh: %d nodes per edge, h = %.6g m, tol = %.3g\n",
              mesh.n, mesh.h, opt.tol);
  if (!cfg.kernel_cache_dir.empty()) {
    std::printf("cache directory: %s\n", cfg.kernel_cache_dir.c_str());
  }
  if (family == "control" || family == "both") {
    const KernelSet ks =
        solve_control_kernels_cached(lc, mesh, opt, cfg.kernel_cache_dir);
    print_residuals("control", ks.stats, kernel_residual(ks, lc));
  }
  if (family == "observer" || family == "both") {
    const ObserverKernelSet oks =
        solve_observer_kernels_cached(lc, mesh, opt, cfg.kernel_cache_dir);
    print_residuals("observer", oks.stats, kernel_residual(oks, lc));
  }
  return 0;
}

int run_simulate(const ScenarioConfig& cfg) {
  if (cfg.out_dir.empty()) {
    throw Error(ErrorKind::config,
                "simulate: no output directory (--out or [output] dir)");
  }
  const RunResult result = run_scenario(cfg);
  write_trace(result.trace, result.metrics, cfg, cfg.out_dir);
  const Metrics& m = result.metrics;
  std::printf("run complete: mode=%s plant=%s scenario=%s steady=%s\n",
              result.trace.mode.c_str(), result.trace.plant.c_str(),
              result.trace.scenario.c_str(), result.trace.steady_mode.c_str());
  std::printf("  recorded %zu snapshots to t = %.6g s\n",
              result.trace.times.size(), result.trace.times.back());
  std::printf("  deviation L2: initial %.6e, final %.6e\n",
              m.initial_deviation, m.deviation.combined.back());
  if (result.trace.has_estimates) {
    std::printf("  estimation error L2: initial %.6e, final %.6e\n",
                m.initial_estimation_error,
                m.estimation_error.combined.back());
  }
  if (std::isfinite(m.convergence_time)) {
    std::printf("  convergence time %.6g s (threshold %.3g of initial)\n",
                m.convergence_time, m.threshold_fraction);
  } else {
    std::printf("  convergence not reached (threshold %.3g of initial)\n",
                m.threshold_fraction);
  }
  std::printf("  horizons (s): t_f %.6f, t_o %.6f, t_out %.6f\n", m.t_f, m.t_o,
              m.t_out);
  if (m.saturated_steps > 0) {
    std::printf("  saturated steps: %d\n", m.saturated_steps);
  }
  std::printf("  wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

void write_fd_csv(const std::filesystem::path& path,
                  const std::vector<FdPoint>& pts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "fundamental-diagram: cannot write " +
                                   path.string());
  }
  out << "rho,v,q\n";
  char buf[128];
  for (const FdPoint& p : pts) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.rho, p.v, p.q);
    out << buf;
  }
}

int run_fd(const ScenarioConfig& cfg, const std::string& out_dir,
           int samples) {
  const ModelParams params = cfg.model_params();
  const SteadyState ss = cfg.resolve_steady(params);
  const FdTable table = fundamental_diagram_samples(params, ss, samples);
  const std::filesystem::path root(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) {
    throw Error(ErrorKind::io, "fundamental-diagram: cannot create " +
                                   root.string() + ": " + ec.message());
  }
  write_fd_csv(root / "fd_slow.csv", table.slow);
  write_fd_csv(root / "fd_fast.csv", table.fast);
  write_fd_csv(root / "fd_single_lane.csv", table.single_lane);
  std::printf("wrote fd_slow.csv, fd_fast.csv, fd_single_lane.csv to %s\n",
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-lane traffic simulation and boundary-control toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string scenario_str, mode_str, plant_str, observer_init_str;
  std::string out_dir, family = "both";
  int nx = 0, samples = 256;
  double cfl = 0.0, t_end = 0.0, tol = 0.0;
  std::uint64_t seed = 0;

  CLI::App* steady = app.add_subcommand(
      "steady", "Resolve and print the steady state with balance residuals");
  steady->add_option("--config", config_path, "INI configuration file");

  CLI::App* lin = app.add_subcommand(
      "linearize",
      "Print linearized coefficients, characteristic speeds, and horizons");
  lin->add_option("--config", config_path, "INI configuration file");

  CLI::App* ker = app.add_subcommand(
      "kernels", "Solve the feedback/observer kernels and print residuals");
  ker->add_option("--config", config_path, "INI configuration file");
  ker->add_option("--mesh-n", nx, "kernel mesh nodes per edge (>= 16)");
  ker->add_option("--tol", tol, "solver tolerance");
  ker->add_option("--cache-dir", out_dir, "kernel cache directory");
  ker->add_option("--family", family, "control | observer | both")
      ->check(CLI::IsMember({"control", "observer", "both"}));

  CLI::App* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  sim->add_option("--config", config_path, "INI configuration file");
  sim->add_option("--scenario", scenario_str, "stop_and_go | bottleneck");
  sim->add_option("--mode", mode_str,
                  "open_loop | full_state | observer | output_feedback");
  sim->add_option("--plant", plant_str, "linearized | nonlinear");
  sim->add_option("--observer-init", observer_init_str, "steady | truth");
  sim->add_option("--nx", nx, "simulation cells");
  sim->add_option("--cfl", cfl, "CFL number in (0, 1]");
  sim->add_option("--t-end", t_end, "end time (s)");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "measurement-noise seed");

  CLI::App* fd = app.add_subcommand(
      "fundamental-diagram", "Emit equilibrium flow/density curve CSVs");
  fd->add_option("--config", config_path, "INI configuration file");
  fd->add_option("--out", out_dir, "output directory")->required();
  fd->add_option("--samples", samples, "points per curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error_json("config", e.what());
    return 2;
  }

  try {
    ScenarioConfig cfg = load_or_default(config_path);
    if (steady->parsed()) {
      print_steady(cfg);
      return 0;
    }
    if (lin->parsed()) {
      print_linearize(cfg);
      return 0;
    }
    if (ker->parsed()) {
      if (ker->count("--mesh-n") > 0) cfg.kernel_n = nx;
      if (ker->count("--tol") > 0) cfg.kernel_tol = tol;
      if (ker->count("--cache-dir") > 0) cfg.kernel_cache_dir = out_dir;
      cfg.validate();
      return run_kernels(cfg, family);
    }
    if (sim->parsed()) {
      if (!scenario_str.empty()) cfg.scenario = parse_scenario_kind(scenario_str);
      if (!mode_str.empty()) cfg.mode = parse_run_mode(mode_str);
      if (!plant_str.empty()) cfg.plant = parse_plant_kind(plant_str);
      if (!observer_init_str.empty()) {
        cfg.observer_init = parse_observer_init(observer_init_str);
      }
      if (sim->count("--nx") > 0) cfg.n_cells = nx;
      if (sim->count("--cfl") > 0) cfg.cfl = cfl;
      if (sim->count("--t-end") > 0) cfg.t_end_s = t_end;
      if (sim->count("--out") > 0) cfg.out_dir = out_dir;
      if (sim->count("--seed") > 0) cfg.noise_seed = seed;
      cfg.validate();
      return run_simulate(cfg);
    }
    if (fd->parsed()) {
      return run_fd(cfg, out_dir, samples);
    }
  } catch (const Error& e) {
    emit_error_json(e.kind_name(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error_json("internal", e.what());
    return 1;
  }
  return 0;
}

// SPDX-License-Identifier: Apache-2.0
/// \file config.hpp
/// \brief Run configuration: INI loading/saving, validation, SI resolution.
///
/// Configuration values are stored in their file units (veh/km, km/h, s, m)
/// so that save/load round trips are exact; conversion to SI happens when
/// building model structures.

#pragma once

#include <cstdint>
#include <string>

#include "twolane/field.hpp"
#include "twolane/model.hpp"

#include <json.hpp>

namespace twolane {

enum class SteadyMode { as_given, consistent };
enum class ScenarioKind { stop_and_go, bottleneck };
enum class RunMode { open_loop, full_state, observer, output_feedback };
enum class PlantKind { linearized, nonlinear };
enum class ObserverInit { steady, truth };

const char* to_string(SteadyMode v);
const char* to_string(ScenarioKind v);
const char* to_string(RunMode v);
const char* to_string(PlantKind v);
const char* to_string(ObserverInit v);
const char* to_string(PressureNorm v);
const char* to_string(LaneMaxRule v);

// Inverse lookups; throw Error(config) naming the allowed values.
SteadyMode parse_steady_mode(const std::string& text);
ScenarioKind parse_scenario_kind(const std::string& text);
RunMode parse_run_mode(const std::string& text);
PlantKind parse_plant_kind(const std::string& text);
ObserverInit parse_observer_init(const std::string& text);

struct ScenarioConfig {
  // [model]
  double gamma = 0.8;
  double v_max_kmh = 144.0;
  double length_m = 1000.0;
  double t_pref_slow_s = 50.0;
  double t_pref_fast_s = 25.0;
  double t_relax_slow_s = 200.0;
  double t_relax_fast_s = 100.0;
  double rho_max_equiv_vehkm = 0.0;  ///< 0 = auto (from the slow-lane cap)
  PressureNorm pressure_norm = PressureNorm::per_lane;
  LaneMaxRule lane_max_rule = LaneMaxRule::zero_of_speed;

  // [steady]
  SteadyMode steady_mode = SteadyMode::as_given;
  double rho_star_slow_vehkm = 180.0;
  double rho_star_fast_vehkm = 80.0;
  double v_star_slow_kmh = 32.0;
  double v_star_fast_kmh = 40.0;
  double rho_max_slow_vehkm = 240.0;
  double rho_max_fast_vehkm = 150.0;

  // [scenario]
  ScenarioKind scenario = ScenarioKind::stop_and_go;
  double ic_amplitude = 0.1;  ///< relative amplitude; bottleneck scales by /0.1
  int ic_wavenumber = 1;
  double shock_position = 0.7;  ///< fraction of length
  double shock_width = 0.1;     ///< fraction of length

  // [run]
  RunMode mode = RunMode::open_loop;
  PlantKind plant = PlantKind::linearized;
  ObserverInit observer_init = ObserverInit::steady;
  int n_cells = 200;
  double cfl = 0.8;
  double t_end_s = 360.0;
  int record_every = 10;

  // [kernels]
  int kernel_n = 129;
  double kernel_tol = 1e-9;
  std::string kernel_cache_dir;  ///< empty = no cache

  // [control]
  double saturation_bound_mps = 0.0;  ///< 0 = unsaturated
  double noise_amplitude_mps = 0.0;   ///< 0 = noise-free measurements
  std::uint64_t noise_seed = 0;
  double convergence_threshold = 0.0;  ///< 0 = auto (1% linearized, 5% nonlinear)

  // [output]
  std::string out_dir;

  /// Field-by-field range validation; throws a config error naming the field.
  void validate() const;

  /// SI model parameters (resolves the automatic equivalent density cap).
  ModelParams model_params() const;

  /// Steady state per the configured mode.
  SteadyState resolve_steady(const ModelParams& params) const;

  /// Threshold fraction with the plant-dependent default applied.
  double effective_threshold() const;
};

/// Parses an INI file.  Missing file or malformed syntax throws a config
/// error (with line information for parse failures); unknown sections or
/// keys are rejected by name.  An empty file yields the defaults above.
ScenarioConfig load_config(const std::string& path);

/// Parses INI text from memory (same semantics as load_config).
ScenarioConfig parse_config_text(const std::string& text);

/// Writes the configuration as INI in file units; load(save(cfg)) == cfg.
void save_config(const ScenarioConfig& cfg, const std::string& path);

/// SI-resolved view of the whole configuration (model, steady state, run
/// settings) for provenance files.
nlohmann::json resolved_json(const ScenarioConfig& cfg);

/// FNV-1a hash of the serialized resolved configuration.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace twolane

// SPDX-License-Identifier: Apache-2.0
/// \file config.cpp

#include "twolane/config.hpp"

#include <cerrno>
#include <cinttypes>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "twolane/units.hpp"
#include "twolane/version.hpp"

namespace twolane {

namespace {

namespace pt = boost::property_tree;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

[[noreturn]] void field_error(const std::string& section,
                              const std::string& key,
                              const std::string& what) {
  throw Error(ErrorKind::config,
              "config: [" + section + "] " + key + ": " + what);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE ||
      !std::isfinite(v)) {
    field_error(section, key, "expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& section, const std::string& key,
              const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE ||
      v < INT_MIN || v > INT_MAX) {
    field_error(section, key, "expected an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& section, const std::string& key,
                        const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE ||
      text.find('-') != std::string::npos) {
    field_error(section, key,
                "expected a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

template <typename Enum>
Enum parse_enum(const std::string& section, const std::string& key,
                const std::string& text,
                const std::map<std::string, Enum>& values) {
  const auto it = values.find(text);
  if (it == values.end()) {
    std::string allowed;
    for (const auto& [name, _] : values) {
      if (!allowed.empty()) allowed += ", ";
      allowed += name;
    }
    field_error(section, key,
                "unknown value '" + text + "' (allowed: " + allowed + ")");
  }
  return it->second;
}

const std::map<std::string, SteadyMode> kSteadyModes = {
    {"as_given", SteadyMode::as_given},
    {"consistent", SteadyMode::consistent}};
const std::map<std::string, ScenarioKind> kScenarios = {
    {"stop_and_go", ScenarioKind::stop_and_go},
    {"bottleneck", ScenarioKind::bottleneck}};
const std::map<std::string, RunMode> kModes = {
    {"open_loop", RunMode::open_loop},
    {"full_state", RunMode::full_state},
    {"observer", RunMode::observer},
    {"output_feedback", RunMode::output_feedback}};
const std::map<std::string, PlantKind> kPlants = {
    {"linearized", PlantKind::linearized},
    {"nonlinear", PlantKind::nonlinear}};
const std::map<std::string, ObserverInit> kObserverInits = {
    {"steady", ObserverInit::steady}, {"truth", ObserverInit::truth}};
const std::map<std::string, PressureNorm> kPressureNorms = {
    {"per_lane", PressureNorm::per_lane}, {"shared", PressureNorm::shared}};
const std::map<std::string, LaneMaxRule> kLaneMaxRules = {
    {"zero_of_speed", LaneMaxRule::zero_of_speed},
    {"scaled_up", LaneMaxRule::scaled_up}};

/// The complete key schema; anything else in the file is rejected.
const std::map<std::string, std::set<std::string>> kSchema = {
    {"model",
     {"gamma", "v_max_kmh", "length_m", "t_pref_slow_s", "t_pref_fast_s",
      "t_relax_slow_s", "t_relax_fast_s", "rho_max_equiv_vehkm",
      "pressure_norm", "lane_max_rule"}},
    {"steady",
     {"mode", "rho_star_slow_vehkm", "rho_star_fast_vehkm", "v_star_slow_kmh",
      "v_star_fast_kmh", "rho_max_slow_vehkm", "rho_max_fast_vehkm"}},
    {"scenario",
     {"kind", "ic_amplitude", "ic_wavenumber", "shock_position",
      "shock_width"}},
    {"run",
     {"mode", "plant", "observer_init", "n_cells", "cfl", "t_end_s",
      "record_every"}},
    {"kernels", {"mesh_n", "tol", "cache_dir"}},
    {"control",
     {"saturation_bound_mps", "noise_amplitude_mps", "noise_seed",
      "convergence_threshold"}},
    {"output", {"dir"}},
};

ScenarioConfig from_ptree(const pt::ptree& tree) {
  // Schema check first so typos surface before value parsing.
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorKind::config,
                  "config: key '" + section + "' appears outside a section");
    }
    const auto schema_it = kSchema.find(section);
    if (schema_it == kSchema.end()) {
      throw Error(ErrorKind::config,
                  "config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (schema_it->second.count(key) == 0) {
        field_error(section, key, "unknown key");
      }
    }
  }

  ScenarioConfig cfg;
  auto text = [&tree](const char* section, const char* key,
                      bool* present) -> std::string {
    const auto sec = tree.get_child_optional(section);
    if (!sec) {
      *present = false;
      return {};
    }
    const auto val = sec->get_optional<std::string>(key);
    *present = static_cast<bool>(val);
    return val ? *val : std::string();
  };
  auto dbl = [&](const char* section, const char* key, double* out) {
    bool present = false;
    const std::string t = text(section, key, &present);
    if (present) *out = parse_double(section, key, t);
  };
  auto integer = [&](const char* section, const char* key, int* out) {
    bool present = false;
    const std::string t = text(section, key, &present);
    if (present) *out = parse_int(section, key, t);
  };
  auto str = [&](const char* section, const char* key, std::string* out) {
    bool present = false;
    const std::string t = text(section, key, &present);
    if (present) *out = t;
  };

  dbl("model", "gamma", &cfg.gamma);
  dbl("model", "v_max_kmh", &cfg.v_max_kmh);
  dbl("model", "length_m", &cfg.length_m);
  dbl("model", "t_pref_slow_s", &cfg.t_pref_slow_s);
  dbl("model", "t_pref_fast_s", &cfg.t_pref_fast_s);
  dbl("model", "t_relax_slow_s", &cfg.t_relax_slow_s);
  dbl("model", "t_relax_fast_s", &cfg.t_relax_fast_s);
  {
    bool present = false;
    const std::string t = text("model", "rho_max_equiv_vehkm", &present);
    if (present) {
      if (t == "auto") {
        cfg.rho_max_equiv_vehkm = 0.0;
      } else {
        cfg.rho_max_equiv_vehkm =
            parse_double("model", "rho_max_equiv_vehkm", t);
      }
    }
  }
  {
    bool present = false;
    std::string t = text("model", "pressure_norm", &present);
    if (present) {
      cfg.pressure_norm =
          parse_enum("model", "pressure_norm", t, kPressureNorms);
    }
    t = text("model", "lane_max_rule", &present);
    if (present) {
      cfg.lane_max_rule =
          parse_enum("model", "lane_max_rule", t, kLaneMaxRules);
    }
    t = text("steady", "mode", &present);
    if (present) cfg.steady_mode = parse_enum("steady", "mode", t, kSteadyModes);
    t = text("scenario", "kind", &present);
    if (present) cfg.scenario = parse_enum("scenario", "kind", t, kScenarios);
    t = text("run", "mode", &present);
    if (present) cfg.mode = parse_enum("run", "mode", t, kModes);
    t = text("run", "plant", &present);
    if (present) cfg.plant = parse_enum("run", "plant", t, kPlants);
    t = text("run", "observer_init", &present);
    if (present) {
      cfg.observer_init =
          parse_enum("run", "observer_init", t, kObserverInits);
    }
    t = text("control", "noise_seed", &present);
    if (present) cfg.noise_seed = parse_u64("control", "noise_seed", t);
  }

  dbl("steady", "rho_star_slow_vehkm", &cfg.rho_star_slow_vehkm);
  dbl("steady", "rho_star_fast_vehkm", &cfg.rho_star_fast_vehkm);
  dbl("steady", "v_star_slow_kmh", &cfg.v_star_slow_kmh);
  dbl("steady", "v_star_fast_kmh", &cfg.v_star_fast_kmh);
  dbl("steady", "rho_max_slow_vehkm", &cfg.rho_max_slow_vehkm);
  dbl("steady", "rho_max_fast_vehkm", &cfg.rho_max_fast_vehkm);

  dbl("scenario", "ic_amplitude", &cfg.ic_amplitude);
  integer("scenario", "ic_wavenumber", &cfg.ic_wavenumber);
  dbl("scenario", "shock_position", &cfg.shock_position);
  dbl("scenario", "shock_width", &cfg.shock_width);

  integer("run", "n_cells", &cfg.n_cells);
  dbl("run", "cfl", &cfg.cfl);
  dbl("run", "t_end_s", &cfg.t_end_s);
  integer("run", "record_every", &cfg.record_every);

  integer("kernels", "mesh_n", &cfg.kernel_n);
  dbl("kernels", "tol", &cfg.kernel_tol);
  str("kernels", "cache_dir", &cfg.kernel_cache_dir);

  dbl("control", "saturation_bound_mps", &cfg.saturation_bound_mps);
  dbl("control", "noise_amplitude_mps", &cfg.noise_amplitude_mps);
  dbl("control", "convergence_threshold", &cfg.convergence_threshold);

  str("output", "dir", &cfg.out_dir);

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_stream(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, "config: " + origin + " line " +
                                       std::to_string(e.line()) + ": " +
                                       e.message());
  }
  return from_ptree(tree);
}

void require(bool ok, const char* section, const char* key,
             const std::string& what) {
  if (!ok) field_error(section, key, what);
}

}  // namespace

const char* to_string(SteadyMode v) {
  return v == SteadyMode::as_given ? "as_given" : "consistent";
}
const char* to_string(ScenarioKind v) {
  return v == ScenarioKind::stop_and_go ? "stop_and_go" : "bottleneck";
}
const char* to_string(RunMode v) {
  switch (v) {
    case RunMode::open_loop:
      return "open_loop";
    case RunMode::full_state:
      return "full_state";
    case RunMode::observer:
      return "observer";
    case RunMode::output_feedback:
      return "output_feedback";
  }
  return "?";
}
const char* to_string(PlantKind v) {
  return v == PlantKind::linearized ? "linearized" : "nonlinear";
}
const char* to_string(ObserverInit v) {
  return v == ObserverInit::steady ? "steady" : "truth";
}
const char* to_string(PressureNorm v) {
  return v == PressureNorm::per_lane ? "per_lane" : "shared";
}
const char* to_string(LaneMaxRule v) {
  return v == LaneMaxRule::zero_of_speed ? "zero_of_speed" : "scaled_up";
}

SteadyMode parse_steady_mode(const std::string& text) {
  return parse_enum("steady", "mode", text, kSteadyModes);
}
ScenarioKind parse_scenario_kind(const std::string& text) {
  return parse_enum("scenario", "kind", text, kScenarios);
}
RunMode parse_run_mode(const std::string& text) {
  return parse_enum("run", "mode", text, kModes);
}
PlantKind parse_plant_kind(const std::string& text) {
  return parse_enum("run", "plant", text, kPlants);
}
ObserverInit parse_observer_init(const std::string& text) {
  return parse_enum("run", "observer_init", text, kObserverInits);
}

void ScenarioConfig::validate() const {
  require(gamma > 0.0 && gamma <= 5.0, "model", "gamma", "must be in (0, 5]");
  require(v_max_kmh > 0.0, "model", "v_max_kmh", "must be positive");
  require(length_m > 0.0, "model", "length_m", "must be positive");
  require(t_pref_slow_s > 0.0, "model", "t_pref_slow_s", "must be positive");
  require(t_pref_fast_s > 0.0, "model", "t_pref_fast_s", "must be positive");
  require(t_relax_slow_s > 0.0, "model", "t_relax_slow_s",
          "must be positive");
  require(t_relax_fast_s > 0.0, "model", "t_relax_fast_s",
          "must be positive");
  require(rho_max_equiv_vehkm >= 0.0, "model", "rho_max_equiv_vehkm",
          "must be positive or 'auto'");

  require(rho_star_slow_vehkm > 0.0, "steady", "rho_star_slow_vehkm",
          "must be positive");
  require(rho_star_fast_vehkm > 0.0, "steady", "rho_star_fast_vehkm",
          "must be positive");
  require(v_star_slow_kmh > 0.0, "steady", "v_star_slow_kmh",
          "must be positive");
  require(v_star_fast_kmh > 0.0, "steady", "v_star_fast_kmh",
          "must be positive");
  require(rho_max_slow_vehkm > rho_star_slow_vehkm, "steady",
          "rho_max_slow_vehkm", "must exceed rho_star_slow_vehkm");
  require(rho_max_fast_vehkm > rho_star_fast_vehkm, "steady",
          "rho_max_fast_vehkm", "must exceed rho_star_fast_vehkm");

  require(ic_amplitude >= 0.0 && ic_amplitude <= 0.5, "scenario",
          "ic_amplitude", "must be in [0, 0.5]");
  require(ic_wavenumber >= 1, "scenario", "ic_wavenumber", "must be >= 1");
  require(shock_position > 0.0 && shock_position < 1.0, "scenario",
          "shock_position", "must be in (0, 1)");
  require(shock_width > 0.0 && shock_width < 1.0, "scenario", "shock_width",
          "must be in (0, 1)");

  require(n_cells >= 8, "run", "n_cells", "must be >= 8");
  require(cfl > 0.0 && cfl <= 1.0, "run", "cfl", "must be in (0, 1]");
  require(t_end_s > 0.0, "run", "t_end_s", "must be positive");
  require(record_every >= 1, "run", "record_every", "must be >= 1");

  require(kernel_n >= 16, "kernels", "mesh_n", "must be >= 16");
  require(kernel_tol > 0.0 && kernel_tol <= 1e-3, "kernels", "tol",
          "must be in (0, 1e-3]");

  require(saturation_bound_mps >= 0.0, "control", "saturation_bound_mps",
          "must be >= 0 (0 disables saturation)");
  require(noise_amplitude_mps >= 0.0, "control", "noise_amplitude_mps",
          "must be >= 0");
  require(convergence_threshold >= 0.0 && convergence_threshold < 1.0,
          "control", "convergence_threshold", "must be in [0, 1)");
}

ModelParams ScenarioConfig::model_params() const {
  ModelParams p;
  p.gamma = gamma;
  p.v_max = kmh_to_ms(v_max_kmh);
  p.seg_length = length_m;
  p.t_pref_slow = t_pref_slow_s;
  p.t_pref_fast = t_pref_fast_s;
  p.t_relax_slow = t_relax_slow_s;
  p.t_relax_fast = t_relax_fast_s;
  p.pressure_norm = pressure_norm;
  p.lane_max_rule = lane_max_rule;
  if (rho_max_equiv_vehkm > 0.0) {
    p.rho_max_equiv = vehkm_to_vehm(rho_max_equiv_vehkm);
  } else {
    p.rho_max_equiv = rho_max_equiv_for_slow_max(
        p, vehkm_to_vehm(rho_max_slow_vehkm));
  }
  p.validate();
  return p;
}

SteadyState ScenarioConfig::resolve_steady(const ModelParams& params) const {
  if (steady_mode == SteadyMode::as_given) {
    return steady_state_as_given(
        params, vehkm_to_vehm(rho_star_slow_vehkm),
        vehkm_to_vehm(rho_star_fast_vehkm), kmh_to_ms(v_star_slow_kmh),
        kmh_to_ms(v_star_fast_kmh), vehkm_to_vehm(rho_max_slow_vehkm),
        vehkm_to_vehm(rho_max_fast_vehkm));
  }
  return compute_steady_state(params, vehkm_to_vehm(rho_star_slow_vehkm));
}

double ScenarioConfig::effective_threshold() const {
  if (convergence_threshold > 0.0) return convergence_threshold;
  return plant == PlantKind::linearized ? 0.01 : 0.05;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, "config: cannot open '" + path + "'");
  }
  return parse_stream(in, path);
}

ScenarioConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in, "<memory>");
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ostringstream out;
  out << "[model]\n";
  out << "gamma = " << fmt_double(cfg.gamma) << "\n";
  out << "v_max_kmh = " << fmt_double(cfg.v_max_kmh) << "\n";
  out << "length_m = " << fmt_double(cfg.length_m) << "\n";
  out << "t_pref_slow_s = " << fmt_double(cfg.t_pref_slow_s) << "\n";
  out << "t_pref_fast_s = " << fmt_double(cfg.t_pref_fast_s) << "\n";
  out << "t_relax_slow_s = " << fmt_double(cfg.t_relax_slow_s) << "\n";
  out << "t_relax_fast_s = " << fmt_double(cfg.t_relax_fast_s) << "\n";
  out << "rho_max_equiv_vehkm = "
      << (cfg.rho_max_equiv_vehkm > 0.0 ? fmt_double(cfg.rho_max_equiv_vehkm)
                                        : std::string("auto"))
      << "\n";
  out << "pressure_norm = " << to_string(cfg.pressure_norm) << "\n";
  out << "lane_max_rule = " << to_string(cfg.lane_max_rule) << "\n";
  out << "\n[steady]\n";
  out << "mode = " << to_string(cfg.steady_mode) << "\n";
  out << "rho_star_slow_vehkm = " << fmt_double(cfg.rho_star_slow_vehkm)
      << "\n";
  out << "rho_star_fast_vehkm = " << fmt_double(cfg.rho_star_fast_vehkm)
      << "\n";
  out << "v_star_slow_kmh = " << fmt_double(cfg.v_star_slow_kmh) << "\n";
  out << "v_star_fast_kmh = " << fmt_double(cfg.v_star_fast_kmh) << "\n";
  out << "rho_max_slow_vehkm = " << fmt_double(cfg.rho_max_slow_vehkm)
      << "\n";
  out << "rho_max_fast_vehkm = " << fmt_double(cfg.rho_max_fast_vehkm)
      << "\n";
  out << "\n[scenario]\n";
  out << "kind = " << to_string(cfg.scenario) << "\n";
  out << "ic_amplitude = " << fmt_double(cfg.ic_amplitude) << "\n";
  out << "ic_wavenumber = " << cfg.ic_wavenumber << "\n";
  out << "shock_position = " << fmt_double(cfg.shock_position) << "\n";
  out << "shock_width = " << fmt_double(cfg.shock_width) << "\n";
  out << "\n[run]\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "plant = " << to_string(cfg.plant) << "\n";
  out << "observer_init = " << to_string(cfg.observer_init) << "\n";
  out << "n_cells = " << cfg.n_cells << "\n";
  out << "cfl = " << fmt_double(cfg.cfl) << "\n";
  out << "t_end_s = " << fmt_double(cfg.t_end_s) << "\n";
  out << "record_every = " << cfg.record_every << "\n";
  out << "\n[kernels]\n";
  out << "mesh_n = " << cfg.kernel_n << "\n";
  out << "tol = " << fmt_double(cfg.kernel_tol) << "\n";
  if (!cfg.kernel_cache_dir.empty()) {
    out << "cache_dir = " << cfg.kernel_cache_dir << "\n";
  }
  out << "\n[control]\n";
  out << "saturation_bound_mps = " << fmt_double(cfg.saturation_bound_mps)
      << "\n";
  out << "noise_amplitude_mps = " << fmt_double(cfg.noise_amplitude_mps)
      << "\n";
  out << "noise_seed = " << cfg.noise_seed << "\n";
  out << "convergence_threshold = " << fmt_double(cfg.convergence_threshold)
      << "\n";
  if (!cfg.out_dir.empty()) {
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorKind::io, "config: cannot write '" + path + "'");
  }
  file << out.str();
}

nlohmann::json resolved_json(const ScenarioConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const SteadyState ss = cfg.resolve_steady(params);
  nlohmann::json j;
  j["version"] = kVersion;
  j["model"] = {{"gamma", params.gamma},
                {"v_max_ms", params.v_max},
                {"length_m", params.seg_length},
                {"t_pref_slow_s", params.t_pref_slow},
                {"t_pref_fast_s", params.t_pref_fast},
                {"t_relax_slow_s", params.t_relax_slow},
                {"t_relax_fast_s", params.t_relax_fast},
                {"rho_max_equiv_vehm", params.rho_max_equiv},
                {"pressure_norm", to_string(params.pressure_norm)},
                {"lane_max_rule", to_string(params.lane_max_rule)}};
  j["steady"] = {{"mode", to_string(cfg.steady_mode)},
                 {"sigma", ss.sigma},
                 {"r_slow", ss.r_slow},
                 {"r_fast", ss.r_fast},
                 {"rho_star_slow_vehm", ss.rho_star_slow},
                 {"rho_star_fast_vehm", ss.rho_star_fast},
                 {"v_star_slow_ms", ss.v_star_slow},
                 {"v_star_fast_ms", ss.v_star_fast},
                 {"p_star_slow_ms", ss.p_star_slow},
                 {"p_star_fast_ms", ss.p_star_fast},
                 {"q_star_slow_vehs", ss.q_star_slow},
                 {"q_star_fast_vehs", ss.q_star_fast},
                 {"rho_max_slow_vehm", ss.rho_max_slow},
                 {"rho_max_fast_vehm", ss.rho_max_fast},
                 {"congested", ss.congested}};
  j["scenario"] = {{"kind", to_string(cfg.scenario)},
                   {"ic_amplitude", cfg.ic_amplitude},
                   {"ic_wavenumber", cfg.ic_wavenumber},
                   {"shock_position", cfg.shock_position},
                   {"shock_width", cfg.shock_width}};
  j["run"] = {{"mode", to_string(cfg.mode)},
              {"plant", to_string(cfg.plant)},
              {"observer_init", to_string(cfg.observer_init)},
              {"n_cells", cfg.n_cells},
              {"cfl", cfg.cfl},
              {"t_end_s", cfg.t_end_s},
              {"record_every", cfg.record_every}};
  j["kernels"] = {{"mesh_n", cfg.kernel_n},
                  {"tol", cfg.kernel_tol},
                  {"cache_dir", cfg.kernel_cache_dir}};
  j["control"] = {{"saturation_bound_mps", cfg.saturation_bound_mps},
                  {"noise_amplitude_mps", cfg.noise_amplitude_mps},
                  {"noise_seed", cfg.noise_seed},
                  {"convergence_threshold", cfg.effective_threshold()}};
  j["output"] = {{"dir", cfg.out_dir}};
  return j;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string dump = resolved_json(cfg).dump();
  std::uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : dump) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace twolane

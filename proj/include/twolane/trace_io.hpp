// SPDX-License-Identifier: Apache-2.0
/// \file trace_io.hpp
/// \brief Persists run results: per-field CSV traces, metrics.json, and the
///        SI-resolved configuration with its hash.

#pragma once

#include <string>

#include "twolane/config.hpp"
#include "twolane/runner.hpp"

namespace twolane {

/// Writes the run's file set into \p dir (created if missing):
///   rho_slow.csv, v_slow.csv, rho_fast.csv, v_fast.csv  — plant fields
///   *_est.csv                                           — when estimates ran
///   commands.csv                                        — applied commands
///   metrics.json                                        — norms and bounds
///   config.resolved.json                                — SI config + hash
/// CSV schema: header "time,<x0>,<x1>,..." with cell-center coordinates in
/// meters; one row per recorded time; all numbers printed with %.17g.
void write_trace(const Trace& trace, const Metrics& metrics,
                 const ScenarioConfig& cfg, const std::string& dir);

}  // namespace twolane

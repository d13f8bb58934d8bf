// SPDX-License-Identifier: Apache-2.0
/// \file units.hpp
/// \brief Unit conversions between the configuration surface and SI.
///
/// Configuration files and reports use road-engineering units (veh/km, km/h,
/// s, m).  Everything behind the public API works in SI: veh/m, m/s, s, m.

#pragma once

namespace twolane {

inline constexpr double kmh_to_ms(double kmh) { return kmh / 3.6; }
inline constexpr double ms_to_kmh(double ms) { return ms * 3.6; }

inline constexpr double vehkm_to_vehm(double vehkm) { return vehkm / 1000.0; }
inline constexpr double vehm_to_vehkm(double vehm) { return vehm * 1000.0; }

/// veh/h from veh/s, used only for reporting flows.
inline constexpr double vehs_to_vehh(double vehs) { return vehs * 3600.0; }

}  // namespace twolane

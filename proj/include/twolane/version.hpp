// SPDX-License-Identifier: Apache-2.0
/// \file version.hpp
/// \brief Library version constants embedded into traces and caches.

#pragma once

namespace twolane {

/// Release version written into trace metadata.  Fixed string; traces carry
/// no timestamps or host-specific data so that reruns stay byte-identical.
inline constexpr const char* kVersion = "0.1.0";

/// Version counter of the kernel solver discretization.  Bumping it
/// invalidates kernel caches produced by earlier solver revisions.
inline constexpr int kKernelSolverVersion = 2;

}  // namespace twolane

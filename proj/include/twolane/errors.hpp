// SPDX-License-Identifier: Apache-2.0
/// \file errors.hpp
/// \brief Error taxonomy shared by the library and the command line tool.

#pragma once

#include <stdexcept>
#include <string>

namespace twolane {

/// Broad failure categories, used to pick process exit codes and to tag the
/// machine-readable error report emitted by the CLI.
enum class ErrorKind {
  config,      ///< bad configuration file, unknown key, out-of-range value
  domain,      ///< argument outside the mathematical domain of an operation
  numerics,    ///< solver blow-up, non-convergence, CFL violation
  io,          ///< file system failure
};

/// Single exception type carried across the library.  The \p kind selects the
/// category; \p what() carries a human-readable message that the CLI also
/// embeds into its JSON error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Stable identifier for the category, e.g. "config".
  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::config:   return "config";
      case ErrorKind::domain:   return "domain";
      case ErrorKind::numerics: return "numerics";
      case ErrorKind::io:       return "io";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

}  // namespace twolane

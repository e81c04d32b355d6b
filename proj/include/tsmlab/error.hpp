// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tsmlab {

// Category attached to every library error. The CLI prints it as a
// machine-readable token, so names are stable API.
enum class ErrorCode {
  Parameter,  // invalid scalar/config value
  Index,      // timestep or array index out of range
  Ordering,   // timesteps in the wrong order
  Condition,  // unknown or unusable condition label
  Step,       // step-size divisibility violation
  Config,     // config file syntax or key errors
  Id,         // unknown object id (splats)
  View,       // degenerate view transform
  Io,         // file read/write failure
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parameter: return "parameter";
    case ErrorCode::Index: return "index";
    case ErrorCode::Ordering: return "ordering";
    case ErrorCode::Condition: return "condition";
    case ErrorCode::Step: return "step";
    case ErrorCode::Config: return "config";
    case ErrorCode::Id: return "id";
    case ErrorCode::View: return "view";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) raise(code, message);
}

}  // namespace tsmlab

// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpulab {

enum class ErrorCode {
  range,
  insufficient_data,
  degenerate_input,
  mismatch,
  input,
  state,
  not_found,
  platform,
  backend,
  io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::range: return "range";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_input: return "degenerate-input";
    case ErrorCode::mismatch: return "mismatch";
    case ErrorCode::input: return "input";
    case ErrorCode::state: return "state";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::platform: return "platform-capability";
    case ErrorCode::backend: return "backend";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by cpulab carries a category so callers (and the CLI
/// exit-code mapping) can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpulab

// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cpulab/clamp.hpp"

namespace cpulab {

/// Deterministic stand-in for an inference runtime: busy time is
/// load_ms + per_token_ms·tokens_in + per_pixel_ns·effective_pixels(S(r)).
struct MockParams {
  double load_ms = 0.0;
  double per_token_ms = 0.0;
  double per_pixel_ns = 0.0;
  ClampSpec clamp{};
  int output_tokens = 16;
  /// Spinning threads; 0 means one per hardware thread.
  int threads = 0;
};

inline std::int64_t count_whitespace_tokens(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

inline double mock_busy_seconds(const MockParams& p, std::int64_t tokens_in,
                                std::optional<Resolution> image) {
  double ms = p.load_ms + p.per_token_ms * static_cast<double>(tokens_in);
  if (image) ms += p.per_pixel_ns * 1e-6 * static_cast<double>(effective_pixels(apply_clamp(*image, p.clamp)));
  return std::max(0.0, ms) * 1e-3;
}

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Keeps `threads` threads spinning until the wall-clock deadline.
inline void spin_for(double seconds, int threads) {
  if (seconds <= 0) return;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  auto body = [deadline] {
    volatile double sink = 1.0;
    while (std::chrono::steady_clock::now() < deadline) {
      for (int i = 0; i < 2000; ++i) sink = sink * 1.0000001 + 1e-9;
    }
  };
  std::vector<std::jthread> helpers;
  for (int i = 1; i < resolve_threads(threads); ++i) helpers.emplace_back(body);
  body();
}

inline std::string filler_text(int tokens) {
  static constexpr std::string_view words[] = {"the", "scene", "shows", "a", "busy", "street",
                                               "with", "cars", "and", "people", "crossing", "lanes"};
  std::string out;
  for (int i = 0; i < tokens; ++i) {
    if (i) out += ' ';
    out += words[static_cast<std::size_t>(i) % std::size(words)];
  }
  return out;
}

}  // namespace cpulab

// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cpulab/error.hpp"

namespace cpulab {

struct Resolution {
  int width = 1;
  int height = 1;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct ClampSpec {
  int max_w = 1024;
  int max_h = 720;

  friend bool operator==(const ClampSpec&, const ClampSpec&) = default;
};

inline std::int64_t effective_pixels(Resolution u) {
  return static_cast<std::int64_t>(u.width) * static_cast<std::int64_t>(u.height);
}

inline std::int64_t effective_pixels(ClampSpec c) {
  return static_cast<std::int64_t>(c.max_w) * static_cast<std::int64_t>(c.max_h);
}

/// Resize-and-clamp: uniform aspect-preserving downscale so the image fits
/// inside max_w × max_h, floor-rounded; identity when it already fits.
inline Resolution apply_clamp(Resolution r, ClampSpec clamp) {
  if (r.width <= clamp.max_w && r.height <= clamp.max_h) return r;
  const double s = std::min({1.0, static_cast<double>(clamp.max_w) / r.width,
                             static_cast<double>(clamp.max_h) / r.height});
  // The limiting side maps to exactly the bound; computing it from the bound
  // avoids 1023.9999 floor artefacts.
  const bool width_limited = static_cast<double>(clamp.max_w) / r.width <=
                             static_cast<double>(clamp.max_h) / r.height;
  Resolution u;
  if (width_limited) {
    u.width = clamp.max_w;
    u.height = static_cast<int>(std::floor(s * r.height + 1e-9));
  } else {
    u.height = clamp.max_h;
    u.width = static_cast<int>(std::floor(s * r.width + 1e-9));
  }
  u.width = std::clamp(u.width, 1, clamp.max_w);
  u.height = std::clamp(u.height, 1, clamp.max_h);
  return u;
}

/// True when r reaches the bound in at least one dimension (at or beyond the knee).
inline bool dominates_clamp(Resolution r, ClampSpec clamp) {
  return r.width >= clamp.max_w || r.height >= clamp.max_h;
}

/// C̃(u) = k0 + k1·pixels(u) below the clamp; T̃(u) = 1 / (m0 + m1·pixels(u)),
/// i.e. seconds-per-token affine in effective pixels.
struct ClampComputeModel {
  bool fitted = false;
  double k0 = 0.0;
  double k1 = 0.0;
  double c_flat = 0.0;
  std::optional<double> m0;
  std::optional<double> m1;

  double compute_at(std::int64_t pixels) const { return k0 + k1 * static_cast<double>(pixels); }
};

inline double predict_compute(Resolution r, ClampSpec clamp, const ClampComputeModel& model) {
  if (!model.fitted) throw Error(ErrorCode::state, "clamp compute model is not fitted");
  return model.compute_at(effective_pixels(apply_clamp(r, clamp)));
}

inline double predict_throughput(Resolution r, ClampSpec clamp, const ClampComputeModel& model) {
  if (!model.fitted || !model.m0 || !model.m1) {
    throw Error(ErrorCode::state, "throughput mapping is not fitted");
  }
  const double spt = *model.m0 + *model.m1 * static_cast<double>(effective_pixels(apply_clamp(r, clamp)));
  if (!(spt > 0)) throw Error(ErrorCode::range, "non-positive predicted seconds per token");
  return 1.0 / spt;
}

/// Parses "1024x720" or "1024X720".
inline std::optional<Resolution> parse_resolution(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string w(text.substr(0, x)), h(text.substr(x + 1));
    const int width = std::stoi(w, &used);
    if (used != w.size()) return std::nullopt;
    const int height = std::stoi(h, &used);
    if (used != h.size()) return std::nullopt;
    if (width < 1 || height < 1) return std::nullopt;
    return Resolution{width, height};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::optional<ClampSpec> parse_clamp(std::string_view text) {
  auto r = parse_resolution(text);
  if (!r) return std::nullopt;
  return ClampSpec{r->width, r->height};
}

inline std::string to_string(Resolution r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

inline std::string to_string(ClampSpec c) {
  return std::to_string(c.max_w) + "x" + std::to_string(c.max_h);
}

}  // namespace cpulab

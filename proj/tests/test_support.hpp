// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic trace generators and independent integration oracles shared by
// the unit tests and the acceptance runner.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cpulab/trace.hpp"

namespace cpulab::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cpulab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Point samples of f at `rate_hz` over [t0, t1] (inclusive of both ends
/// when they land on the grid).
inline ResourceTrace sample_function(const std::function<double(double)>& cpu, double t0, double t1,
                                     double rate_hz, const std::function<double(double)>& ram = {}) {
  ResourceTrace tr;
  tr.nominal_rate_hz = rate_hz;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) * rate_hz));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate_hz;
    tr.samples.push_back({t, cpu(t), ram ? ram(t) : 100.0});
  }
  return tr;
}

/// Midpoint Riemann sum of max(f - base, 0) on a fine grid.
inline double riemann_oracle(const std::function<double(double)>& f, double base, double a, double b,
                             double rate_hz = 1000.0) {
  const auto n = static_cast<std::size_t>(std::llround((b - a) * rate_hz));
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s += std::max(f(a + (static_cast<double>(k) + 0.5) * h) - base, 0.0) * h;
  }
  return s;
}

struct Pulse {
  double start = 0.0;
  double end = 0.0;
  double level = 0.0;
};

/// Trace as a cumulative-counter sampler reports it: sample k holds the mean
/// activity over (t_{k-1}, t_k], plus Gaussian noise.
struct PulseTrace {
  ResourceTrace trace;
  std::vector<Pulse> pulses;
  double baseline = 0.0;
  double duration = 0.0;
};

inline PulseTrace pulse_trace(const std::vector<Pulse>& pulses, double duration, double baseline, double noise_sd,
                              std::uint32_t seed, double rate_hz = 5.0) {
  PulseTrace out;
  out.pulses = pulses;
  out.baseline = baseline;
  out.duration = duration;
  out.trace.nominal_rate_hz = rate_hz;
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd);
  const double dt = 1.0 / rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration * rate_hz));
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    double v = baseline;
    for (const auto& p : pulses) {
      const double overlap = std::max(0.0, std::min(t, p.end) - std::max(t - dt, p.start));
      v += p.level * overlap / dt;
    }
    if (noise_sd > 0) v += noise(rng);
    out.trace.samples.push_back({t, std::clamp(v, 0.0, 100.0), 500.0});
  }
  return out;
}

/// Total length of the intersection of [a, b] with a set of intervals.
inline double covered(double a, double b, const std::vector<InferenceWindow>& windows) {
  double s = 0.0;
  for (const auto& w : windows) s += std::max(0.0, std::min(b, w.end_t) - std::max(a, w.start_t));
  return s;
}

}  // namespace cpulab::testing

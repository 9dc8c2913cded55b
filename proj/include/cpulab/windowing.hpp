// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cpulab/error.hpp"
#include "cpulab/trace.hpp"

namespace cpulab {

namespace detail {

inline double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Per-channel median over the first `pre_window_s` seconds of the trace.
/// The median keeps isolated spikes (daemons waking up) out of the baseline.
inline IdleBaseline estimate_idle_baseline(const ResourceTrace& trace, double pre_window_s) {
  std::vector<double> cpu, ram;
  const double limit = trace.start_t() + pre_window_s;
  for (const auto& s : trace.samples) {
    if (s.t > limit) break;
    cpu.push_back(s.cpu_pct);
    ram.push_back(s.ram_mb);
  }
  if (cpu.size() < 5) {
    throw Error(ErrorCode::insufficient_data,
                "idle baseline needs >= 5 samples in the pre-window, got " + std::to_string(cpu.size()));
  }
  IdleBaseline b;
  b.n_samples = cpu.size();
  b.dispersion = detail::stddev_of(cpu);
  b.ram_dispersion = detail::stddev_of(ram);
  b.cpu_pct = detail::median_of(std::move(cpu));
  b.ram_mb = detail::median_of(std::move(ram));
  return b;
}

struct DetectionParams {
  int smooth_span = 3;            // samples, centered moving average
  double rise_threshold = 5.0;    // %/s on the smoothed signal
  double min_duration_s = 0.3;
  double min_gap_s = 1.0;         // idle time needed to close a window
  double hysteresis_sigmas = 3.0;
  double min_excess_pct = 1.0;    // floor for the hysteresis band
};

/// Detected windows are sorted and pairwise disjoint.
///
/// A window opens at the first sample that is above the activity band
/// (baseline + max(k·dispersion, min_excess)) while the smoothed CPU
/// derivative exceeded `rise_threshold` within the last `smooth_span`
/// samples; it starts one sample earlier so the rising transition is
/// integrated. It closes at the first sample of a run that stays inside the
/// band for at least `min_gap_s`.
inline std::vector<InferenceWindow> detect_inference_windows(const ResourceTrace& trace,
                                                             const IdleBaseline& baseline,
                                                             const DetectionParams& params = {}) {
  const auto& xs = trace.samples;
  const std::size_t n = xs.size();
  std::vector<InferenceWindow> out;
  if (n < 2) return out;

  const int span = std::max(1, params.smooth_span);
  const int half = span / 2;
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + (span - 1 - half));
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += xs[j].cpu_pct;
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }
  std::vector<double> deriv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 < n ? i + 1 : n - 1;
    const double dt = xs[b].t - xs[a].t;
    deriv[i] = dt > 0 ? (smooth[b] - smooth[a]) / dt : 0.0;
  }

  const double band =
      baseline.cpu_pct + std::max(params.hysteresis_sigmas * baseline.dispersion, params.min_excess_pct);
  auto recent_rise = [&](std::size_t i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(span) ? i + 1 - span : 0;
    for (std::size_t j = lo; j <= i; ++j) {
      if (deriv[j] > params.rise_threshold) return true;
    }
    return false;
  };

  bool open = false;
  std::size_t start = 0;
  long pending = -1;        // first index of the current in-band run
  long last_end = -1;
  auto emit = [&](std::size_t end) {
    if (xs[end].t - xs[start].t >= params.min_duration_s && end > start) {
      out.push_back({xs[start].t, xs[end].t, "w" + std::to_string(out.size())});
    }
    last_end = static_cast<long>(end);
    open = false;
    pending = -1;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const bool active = xs[i].cpu_pct > band;
    if (!open) {
      if (active && recent_rise(i)) {
        open = true;
        pending = -1;
        long s = static_cast<long>(i) - 1;
        s = std::max(s, last_end + 1);
        start = static_cast<std::size_t>(std::max(s, 0L));
      }
      continue;
    }
    if (active) {
      pending = -1;
      continue;
    }
    if (pending < 0) pending = static_cast<long>(i);
    if (xs[i].t - xs[static_cast<std::size_t>(pending)].t >= params.min_gap_s) {
      emit(static_cast<std::size_t>(pending));
    }
  }
  if (open) emit(pending >= 0 ? static_cast<std::size_t>(pending) : n - 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].prompt_id = "w" + std::to_string(k);
  return out;
}

}  // namespace cpulab

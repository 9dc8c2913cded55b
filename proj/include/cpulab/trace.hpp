// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "cpulab/error.hpp"

namespace cpulab {

/// One resource reading. `t` is seconds since run start; `cpu_pct` is percent
/// of total machine capacity (summed over cores, divided by core count).
struct ResourceSample {
  double t = 0.0;
  double cpu_pct = 0.0;
  double ram_mb = 0.0;

  friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

struct ResourceTrace {
  std::vector<ResourceSample> samples;
  double nominal_rate_hz = 5.0;
  std::string device;
  std::string run_id;

  bool empty() const { return samples.empty(); }
  double start_t() const { return samples.empty() ? 0.0 : samples.front().t; }
  double end_t() const { return samples.empty() ? 0.0 : samples.back().t; }
};

struct IdleBaseline {
  double cpu_pct = 0.0;
  double ram_mb = 0.0;
  std::size_t n_samples = 0;
  /// Standard deviation of CPU over the estimation window.
  double dispersion = 0.0;
  double ram_dispersion = 0.0;
};

struct InferenceWindow {
  double start_t = 0.0;
  double end_t = 0.0;
  std::string prompt_id;

  double duration() const { return end_t - start_t; }
};

struct AucMetrics {
  double cpu_auc = 0.0;   // %·s
  double ram_auc = 0.0;   // MB·s
  double duration_s = 0.0;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  double throughput_tps = 0.0;
};

struct PowerSample {
  double t = 0.0;
  double watts = 0.0;

  friend bool operator==(const PowerSample&, const PowerSample&) = default;
};

struct EnergyTrace {
  std::vector<PowerSample> samples;
  double nominal_rate_hz = 1.0;
  std::string device;
  std::string run_id;
};

/// Energy figures for one inference window.
struct EnergyMetrics {
  double wh_integrated = 0.0;
  /// Max power times window duration; the figure power-meter tables usually
  /// report as "max Wh".
  double wh_max_bound = 0.0;
  double max_power_w = 0.0;
  double mean_power_w = 0.0;
  double duration_s = 0.0;
};

namespace detail {

// Integral over one linear segment from y0 to y1 of length dt. With `clip`,
// integrates max(y, 0) exactly, splitting at the zero crossing.
inline double segment_area(double y0, double y1, double dt, bool clip) {
  if (!clip || (y0 >= 0.0 && y1 >= 0.0)) return 0.5 * (y0 + y1) * dt;
  if (y0 <= 0.0 && y1 <= 0.0) return 0.0;
  const double pos = std::max(y0, y1);
  const double neg = -std::min(y0, y1);
  return 0.5 * pos * dt * (pos / (pos + neg));
}

// Trapezoidal integral of the linear interpolant through (time(s), value(s))
// over [a, b]. Requires the samples to cover [a, b] and be sorted by time.
template <class Samples, class TimeFn, class ValueFn>
double integrate_linear(const Samples& samples, TimeFn time, ValueFn value, double a, double b,
                        bool clip) {
  if (b <= a) return 0.0;
  auto first = std::begin(samples);
  auto last = std::end(samples);
  // First sample strictly after a.
  auto it = std::upper_bound(first, last, a, [&](double x, const auto& s) { return x < time(s); });
  if (it == first || it == last) {
    // a coincides with the last sample or lies outside; caller validates coverage.
    return 0.0;
  }
  auto prev = std::prev(it);
  auto lerp = [&](const auto& s0, const auto& s1, double t) {
    const double t0 = time(s0), t1 = time(s1);
    if (t1 == t0) return value(s1);
    return value(s0) + (value(s1) - value(s0)) * (t - t0) / (t1 - t0);
  };

  double t_cur = a;
  double y_cur = lerp(*prev, *it, a);
  double total = 0.0;
  for (; it != last; prev = it, ++it) {
    const double t_next = time(*it);
    if (t_next >= b) {
      const double y_b = lerp(*prev, *it, b);
      total += segment_area(y_cur, y_b, b - t_cur, clip);
      return total;
    }
    const double y_next = value(*it);
    total += segment_area(y_cur, y_next, t_next - t_cur, clip);
    t_cur = t_next;
    y_cur = y_next;
  }
  return total;
}

template <class Samples, class TimeFn, class ValueFn>
double interpolate_at(const Samples& samples, TimeFn time, ValueFn value, double t) {
  auto first = std::begin(samples);
  auto last = std::end(samples);
  auto it = std::lower_bound(first, last, t, [&](const auto& s, double x) { return time(s) < x; });
  if (it == last) return value(*std::prev(last));
  if (it == first || time(*it) == t) return value(*it);
  auto prev = std::prev(it);
  const double t0 = time(*prev), t1 = time(*it);
  return value(*prev) + (value(*it) - value(*prev)) * (t - t0) / (t1 - t0);
}

}  // namespace detail

struct AucPair {
  double cpu_auc = 0.0;  // %·s
  double ram_auc = 0.0;  // MB·s
};

/// Trapezoidal area of max(signal - baseline, 0) over the window, for CPU and
/// RAM alike. Window edges that fall between samples are linearly interpolated.
inline AucPair auc_above_baseline(const ResourceTrace& trace, const InferenceWindow& window,
                                  const IdleBaseline& baseline) {
  if (window.end_t <= window.start_t) {
    throw Error(ErrorCode::range, "window end must be after start");
  }
  if (trace.samples.empty() || window.start_t < trace.start_t() || window.end_t > trace.end_t()) {
    throw Error(ErrorCode::range, "window [" + std::to_string(window.start_t) + ", " +
                                      std::to_string(window.end_t) + "] lies outside the trace");
  }
  const auto inside = std::count_if(trace.samples.begin(), trace.samples.end(), [&](const auto& s) {
    return s.t >= window.start_t && s.t <= window.end_t;
  });
  if (inside < 2) {
    throw Error(ErrorCode::insufficient_data, "fewer than 2 samples inside the window");
  }
  auto time = [](const ResourceSample& s) { return s.t; };
  const double cpu0 = baseline.cpu_pct;
  const double ram0 = baseline.ram_mb;
  AucPair out;
  out.cpu_auc = detail::integrate_linear(
      trace.samples, time, [cpu0](const ResourceSample& s) { return s.cpu_pct - cpu0; },
      window.start_t, window.end_t, true);
  out.ram_auc = detail::integrate_linear(
      trace.samples, time, [ram0](const ResourceSample& s) { return s.ram_mb - ram0; },
      window.start_t, window.end_t, true);
  return out;
}

/// Integrated energy (Wh) of the power trace over the part of the window it
/// covers; power at window edges is interpolated between meter samples.
inline double energy_for_window(const EnergyTrace& energy, const InferenceWindow& window) {
  if (energy.samples.size() < 2) {
    throw Error(ErrorCode::range, "energy trace needs at least 2 samples");
  }
  const double lo = std::max(window.start_t, energy.samples.front().t);
  const double hi = std::min(window.end_t, energy.samples.back().t);
  if (hi <= lo) throw Error(ErrorCode::range, "energy trace does not overlap the window");
  const double joules = detail::integrate_linear(
      energy.samples, [](const PowerSample& s) { return s.t; },
      [](const PowerSample& s) { return s.watts; }, lo, hi, false);
  return joules / 3600.0;
}

inline EnergyMetrics energy_metrics(const EnergyTrace& energy, const InferenceWindow& window) {
  EnergyMetrics m;
  m.wh_integrated = energy_for_window(energy, window);
  const double lo = std::max(window.start_t, energy.samples.front().t);
  const double hi = std::min(window.end_t, energy.samples.back().t);
  auto time = [](const PowerSample& s) { return s.t; };
  auto watts = [](const PowerSample& s) { return s.watts; };
  double peak = std::max(detail::interpolate_at(energy.samples, time, watts, lo),
                         detail::interpolate_at(energy.samples, time, watts, hi));
  for (const auto& s : energy.samples) {
    if (s.t > lo && s.t < hi) peak = std::max(peak, s.watts);
  }
  m.max_power_w = peak;
  m.mean_power_w = m.wh_integrated * 3600.0 / (hi - lo);
  m.duration_s = window.duration();
  m.wh_max_bound = peak * m.duration_s / 3600.0;
  return m;
}

inline double throughput(std::int64_t tokens_out, const InferenceWindow& window) {
  if (tokens_out < 0) throw Error(ErrorCode::input, "negative token count");
  const double d = window.duration();
  if (!(d > 0.0)) throw Error(ErrorCode::range, "zero-length window");
  return static_cast<double>(tokens_out) / d;
}

/// Invariant violations of a trace (empty when healthy): ordering, value
/// ranges, and median sample spacing within ±50 % of the nominal period.
inline std::vector<std::string> check_trace(const ResourceTrace& trace) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (s.t < 0) problems.push_back("negative timestamp at sample " + std::to_string(i));
    if (i > 0 && !(s.t > trace.samples[i - 1].t)) {
      problems.push_back("timestamps not strictly increasing at sample " + std::to_string(i));
    }
    if (s.cpu_pct < 0 || s.cpu_pct > 100) {
      problems.push_back("cpu_pct out of [0, 100] at sample " + std::to_string(i));
    }
    if (s.ram_mb < 0) problems.push_back("negative ram_mb at sample " + std::to_string(i));
  }
  if (trace.samples.size() >= 3 && trace.nominal_rate_hz > 0) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
      gaps.push_back(trace.samples[i].t - trace.samples[i - 1].t);
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double median = gaps[gaps.size() / 2];
    const double period = 1.0 / trace.nominal_rate_hz;
    if (std::abs(median - period) > 0.5 * period) {
      problems.push_back("median sample gap " + std::to_string(median) +
                         " s deviates more than 50 % from the nominal period");
    }
  }
  return problems;
}

}  // namespace cpulab

// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cpulab/windowing.hpp"
#include "test_support.hpp"

namespace cpulab {
namespace {

ResourceTrace from_values(const std::vector<double>& cpu, double dt = 0.2) {
  ResourceTrace tr;
  for (std::size_t i = 0; i < cpu.size(); ++i) tr.samples.push_back({dt * i, cpu[i], 100.0 + i});
  return tr;
}

TEST(IdleBaseline, MedianIgnoresSpike) {
  const auto b = estimate_idle_baseline(from_values({5, 5, 5, 90, 5}), 10.0);
  EXPECT_DOUBLE_EQ(b.cpu_pct, 5.0);
  EXPECT_EQ(b.n_samples, 5u);
  EXPECT_DOUBLE_EQ(b.ram_mb, 102.0);
}

TEST(IdleBaseline, GaussianIdleRecoversLevelAndSpread) {
  const auto pt = testing::pulse_trace({}, 60.0, 7.0, 0.5, 3);
  const auto b = estimate_idle_baseline(pt.trace, 60.0);
  EXPECT_NEAR(b.cpu_pct, 7.0, 0.1);
  EXPECT_NEAR(b.dispersion, 0.5, 0.08);
}

TEST(IdleBaseline, OnlyUsesPreWindow) {
  const auto b = estimate_idle_baseline(from_values({2, 2, 2, 2, 2, 2, 80, 80, 80, 80, 80, 80, 80}), 1.0);
  EXPECT_DOUBLE_EQ(b.cpu_pct, 2.0);
}

TEST(IdleBaseline, TooFewSamples) {
  try {
    estimate_idle_baseline(from_values({1, 2, 3, 4}), 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
  }
}

TEST(DetectWindows, FlatTraceHasNone) {
  const auto tr = testing::sample_function([](double) { return 4.0; }, 0.0, 30.0, 5.0);
  EXPECT_TRUE(detect_inference_windows(tr, estimate_idle_baseline(tr, 5.0)).empty());
  // jitter inside the 1% floor
  const auto wobble = testing::sample_function([](double t) { return 4.0 + 0.4 * std::sin(3.0 * t); }, 0.0, 30.0, 5.0);
  EXPECT_TRUE(detect_inference_windows(wobble, estimate_idle_baseline(wobble, 5.0)).empty());
}

TEST(DetectWindows, SquarePulseEdgesWithinOneSample) {
  const auto pt = testing::pulse_trace({{10.0, 20.0, 40.0}}, 30.0, 5.0, 0.5, 17);
  const auto w = detect_inference_windows(pt.trace, estimate_idle_baseline(pt.trace, 5.0));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NEAR(w[0].start_t, 10.0, 0.2 + 1e-9);
  EXPECT_NEAR(w[0].end_t, 20.0, 0.2 + 1e-9);
}

TEST(DetectWindows, GapLongerThanMinGapSplits) {
  const auto pt = testing::pulse_trace({{6.0, 9.0, 30.0}, {14.0, 17.0, 30.0}}, 25.0, 5.0, 0.3, 5);
  DetectionParams p;
  p.min_gap_s = 2.0;
  const auto w = detect_inference_windows(pt.trace, estimate_idle_baseline(pt.trace, 5.0), p);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_LT(w[0].end_t, w[1].start_t);
}

TEST(DetectWindows, GapShorterThanMinGapMerges) {
  const auto pt = testing::pulse_trace({{6.0, 9.0, 30.0}, {10.0, 13.0, 30.0}}, 20.0, 5.0, 0.3, 5);
  DetectionParams p;
  p.min_gap_s = 2.0;
  const auto w = detect_inference_windows(pt.trace, estimate_idle_baseline(pt.trace, 5.0), p);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_LE(w[0].start_t, 6.0);
  EXPECT_GE(w[0].end_t, 13.0);
}

TEST(DetectWindows, ShortBlipBelowMinDurationDropped) {
  // a single-sample spike closes after one in-band sample: 0.2 s < 0.3 s
  std::vector<double> v(60, 5.0);
  v[30] = 60.0;
  const auto tr = from_values(v);
  DetectionParams p;
  p.min_duration_s = 0.5;
  EXPECT_TRUE(detect_inference_windows(tr, estimate_idle_baseline(tr, 5.0), p).empty());
}

TEST(DetectWindows, SortedDisjointAndShiftInvariant) {
  std::vector<testing::Pulse> pulses;
  for (int k = 0; k < 6; ++k) pulses.push_back({5.0 + 8.0 * k, 8.0 + 8.0 * k, 20.0 + 5.0 * k});
  const auto pt = testing::pulse_trace(pulses, 60.0, 3.0, 0.4, 99);
  const auto b = estimate_idle_baseline(pt.trace, 4.0);
  const auto w = detect_inference_windows(pt.trace, b);
  ASSERT_EQ(w.size(), 6u);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_LT(w[i].start_t, w[i].end_t);
    if (i) {
      EXPECT_LT(w[i - 1].end_t, w[i].start_t);
    }
    EXPECT_EQ(w[i].prompt_id, "w" + std::to_string(i));
  }

  ResourceTrace shifted = pt.trace;
  for (auto& s : shifted.samples) s.cpu_pct += 10.0;
  const auto w2 = detect_inference_windows(shifted, estimate_idle_baseline(shifted, 4.0));
  ASSERT_EQ(w2.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_DOUBLE_EQ(w2[i].start_t, w[i].start_t);
    EXPECT_DOUBLE_EQ(w2[i].end_t, w[i].end_t);
  }
}

TEST(DetectWindows, CoversActiveTimeAndLittleIdle) {
  const std::vector<testing::Pulse> pulses = {{5.0, 7.5, 35.0}, {15.0, 19.0, 50.0}, {28.0, 29.0, 25.0}};
  const auto pt = testing::pulse_trace(pulses, 40.0, 6.0, 0.6, 1234);
  const auto w = detect_inference_windows(pt.trace, estimate_idle_baseline(pt.trace, 4.0));
  double active = 0.0, hit = 0.0;
  for (const auto& p : pulses) {
    active += p.end - p.start;
    hit += testing::covered(p.start, p.end, w);
  }
  const double idle_covered = testing::covered(0.0, 40.0, w) - hit;
  EXPECT_GE(hit / active, 0.95);
  EXPECT_LE(idle_covered / (40.0 - active), 0.05);
}

TEST(DetectWindows, TinyTraces) {
  IdleBaseline b;
  EXPECT_TRUE(detect_inference_windows(ResourceTrace{}, b).empty());
  EXPECT_TRUE(detect_inference_windows(from_values({50}), b).empty());
}

}  // namespace
}  // namespace cpulab

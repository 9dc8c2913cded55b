// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cpulab/trace.hpp"
#include "test_support.hpp"

namespace cpulab {
namespace {

ResourceTrace from_values(const std::vector<double>& cpu, double dt = 0.2, double t0 = 0.0) {
  ResourceTrace tr;
  for (std::size_t i = 0; i < cpu.size(); ++i) tr.samples.push_back({t0 + dt * i, cpu[i], 100.0});
  return tr;
}

IdleBaseline base(double cpu, double ram = 100.0) {
  IdleBaseline b;
  b.cpu_pct = cpu;
  b.ram_mb = ram;
  return b;
}

TEST(AucAboveBaseline, ConstantAtBaselineIsZero) {
  const auto tr = testing::sample_function([](double) { return 12.0; }, 0.0, 10.0, 5.0);
  EXPECT_DOUBLE_EQ(auc_above_baseline(tr, {1.0, 7.4, "w"}, base(12.0)).cpu_auc, 0.0);
}

TEST(AucAboveBaseline, RectangleIsExact) {
  const auto tr = testing::sample_function([](double) { return 15.0; }, 0.0, 4.0, 5.0);
  EXPECT_NEAR(auc_above_baseline(tr, {0.0, 4.0, "w"}, base(5.0)).cpu_auc, 40.0, 1e-9);
}

TEST(AucAboveBaseline, HandTrapezoid) {
  // (5 + 15 + 15 + 5) * 0.2
  const auto tr = from_values({0, 10, 20, 10, 0});
  EXPECT_NEAR(auc_above_baseline(tr, {0.0, 0.8, "w"}, base(0.0)).cpu_auc, 8.0, 1e-12);
}

TEST(AucAboveBaseline, RamIntegratedLikeCpu) {
  ResourceTrace tr;
  for (int i = 0; i <= 10; ++i) tr.samples.push_back({0.2 * i, 50.0, 1000.0 + 10.0 * i});
  // ram excess over baseline 1000 is 10*i MB at t=0.2 i, i.e. 50 t; integral over [0, 2] = 100
  const auto a = auc_above_baseline(tr, {0.0, 2.0, "w"}, base(50.0, 1000.0));
  EXPECT_NEAR(a.ram_auc, 100.0, 1e-9);
  EXPECT_DOUBLE_EQ(a.cpu_auc, 0.0);
}

TEST(AucAboveBaseline, PiecewiseLinearExactWithEdgesBetweenSamples) {
  auto f = [](double t) { return t < 2.0 ? 10.0 + 10.0 * t : 30.0 - 5.0 * (t - 2.0); };
  const auto tr = testing::sample_function(f, 0.0, 4.0, 5.0);
  // window edges off the sample grid; integral of f - 10 over [0.3, 3.7]
  auto F = [](double t) { return t < 2.0 ? 5.0 * t * t : 20.0 + 20.0 * (t - 2.0) - 2.5 * (t - 2.0) * (t - 2.0); };
  EXPECT_NEAR(auc_above_baseline(tr, {0.3, 3.7, "w"}, base(10.0)).cpu_auc, F(3.7) - F(0.3), 1e-9);
}

TEST(AucAboveBaseline, ClipsDipsBelowBaseline) {
  const auto tr = from_values({10, 0, 10, 0, 10}, 1.0);
  const double auc = auc_above_baseline(tr, {0.0, 4.0, "w"}, base(5.0)).cpu_auc;
  // each segment crosses the baseline at its midpoint: 4 triangles of 0.5 * 0.5 * 5
  EXPECT_NEAR(auc, 5.0, 1e-12);
  EXPECT_GE(auc_above_baseline(tr, {0.0, 4.0, "w"}, base(50.0)).cpu_auc, 0.0);
}

TEST(AucAboveBaseline, Additivity) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<double> v(60);
  for (auto& x : v) x = u(rng);
  const auto tr = from_values(v);
  const auto b = base(30.0);
  for (int split = 1; split < 58; split += 7) {
    const double a = 0.0, m = 0.2 * split, c = 0.2 * 59;
    const double whole = auc_above_baseline(tr, {a, c, "w"}, b).cpu_auc;
    const double parts = auc_above_baseline(tr, {a, m, "w"}, b).cpu_auc +
                         auc_above_baseline(tr, {m, c, "w"}, b).cpu_auc;
    EXPECT_NEAR(whole, parts, 1e-9 * std::max(1.0, whole));
  }
}

TEST(AucAboveBaseline, OracleAgreementOnSmoothSignals) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> amp(10.0, 60.0), center(5.0, 25.0), width(1.5, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = amp(rng), c = center(rng), w = width(rng);
    auto f = [=](double t) { return 5.0 + a * std::exp(-0.5 * (t - c) * (t - c) / (w * w)); };
    const auto tr = testing::sample_function(f, 0.0, 30.0, 5.0);
    const double got = auc_above_baseline(tr, {0.0, 30.0, "w"}, base(5.0)).cpu_auc;
    const double want = testing::riemann_oracle(f, 5.0, 0.0, 30.0);
    EXPECT_NEAR(got, want, 0.005 * want) << "trial " << trial;
  }
}

TEST(AucAboveBaseline, Errors) {
  const auto tr = from_values({0, 1, 2, 3, 4});
  try {
    auc_above_baseline(tr, {0.0, 5.0, "w"}, base(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::range);
  }
  try {
    auc_above_baseline(tr, {0.25, 0.35, "w"}, base(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
  }
  try {
    auc_above_baseline(tr, {0.4, 0.4, "w"}, base(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::range);
  }
}

EnergyTrace constant_power(double watts, double t0, double t1) {
  EnergyTrace e;
  for (double t = t0; t <= t1 + 1e-9; t += 1.0) e.samples.push_back({t, watts});
  return e;
}

TEST(Energy, ConstantPowerIsPTOver3600) {
  const auto e = constant_power(43.0, 0.0, 20.0);
  EXPECT_NEAR(energy_for_window(e, {2.0, 15.0, "p"}), 43.0 * 13.0 / 3600.0, 1e-12);
  EXPECT_NEAR(energy_for_window(e, {2.0, 15.0, "p"}), 0.1553, 5e-5);
  EXPECT_NEAR(energy_for_window(constant_power(13.6, 0.0, 40.0), {0.0, 34.8, "p"}), 0.1315, 5e-5);
  EXPECT_DOUBLE_EQ(energy_for_window(constant_power(0.0, 0.0, 10.0), {1.0, 9.0, "p"}), 0.0);
}

TEST(Energy, InterpolatesEdgesBetweenMeterSamples) {
  EnergyTrace e;
  for (int t = 0; t <= 10; ++t) e.samples.push_back({double(t), 10.0 * t});
  // integral of 10 t over [2.5, 6.5] = 5 (6.5^2 - 2.5^2) = 180 J
  EXPECT_NEAR(energy_for_window(e, {2.5, 6.5, "p"}), 180.0 / 3600.0, 1e-12);
  const auto m = energy_metrics(e, {2.5, 6.5, "p"});
  EXPECT_NEAR(m.max_power_w, 65.0, 1e-12);
  EXPECT_NEAR(m.wh_max_bound, 65.0 * 4.0 / 3600.0, 1e-12);
  EXPECT_GE(m.max_power_w, m.mean_power_w);
  EXPECT_LE(m.wh_integrated, m.wh_max_bound);
}

TEST(Energy, NoOverlapIsRangeError) {
  const auto e = constant_power(5.0, 0.0, 5.0);
  try {
    energy_for_window(e, {10.0, 12.0, "p"});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::range);
  }
}

TEST(Throughput, Definition) {
  EXPECT_DOUBLE_EQ(throughput(0, {0.0, 3.0, "p"}), 0.0);
  EXPECT_DOUBLE_EQ(throughput(100, {5.0, 15.0, "p"}), 10.0);
  try {
    throughput(10, {2.0, 2.0, "p"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::range);
  }
}

TEST(CheckTrace, FlagsViolations) {
  ResourceTrace ok = testing::sample_function([](double) { return 5.0; }, 0.0, 5.0, 5.0);
  EXPECT_TRUE(check_trace(ok).empty());

  ResourceTrace bad = ok;
  std::swap(bad.samples[3], bad.samples[4]);
  EXPECT_FALSE(check_trace(bad).empty());

  ResourceTrace range = ok;
  range.samples[2].cpu_pct = 120.0;
  EXPECT_FALSE(check_trace(range).empty());

  ResourceTrace slow = testing::sample_function([](double) { return 5.0; }, 0.0, 10.0, 1.0);
  slow.nominal_rate_hz = 5.0;
  EXPECT_FALSE(check_trace(slow).empty());
}

}  // namespace
}  // namespace cpulab

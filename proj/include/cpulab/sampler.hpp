// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cpulab/trace.hpp"

namespace cpulab {

enum class SamplerScope { system, process_tree };

struct SamplerConfig {
  double rate_hz = 5.0;
  SamplerScope scope = SamplerScope::system;
  /// Root of the process tree for SamplerScope::process_tree; 0 means this process.
  int pid = 0;
  /// Power-meter log ("t watts" lines) tailed while sampling.
  std::optional<std::filesystem::path> energy_source;
  std::string device;
  std::string run_id;
};

/// Throws Error(input) unless rate_hz is within [1, 50].
void validate(const SamplerConfig& config);

struct SamplerResult {
  ResourceTrace resources;
  std::optional<EnergyTrace> energy;
  /// CPU seconds consumed by the collection thread itself.
  double overhead_cpu_s = 0.0;
  double wall_s = 0.0;
  std::size_t missed_ticks = 0;
};

/// Background collector. Counters come from procfs (override the root with the
/// CPULAB_PROC_ROOT environment variable). CPU is differentiated from
/// cumulative tick counters between consecutive samples; missed ticks are
/// skipped, never back-filled.
class SamplerHandle {
 public:
  SamplerHandle(SamplerHandle&&) noexcept;
  SamplerHandle& operator=(SamplerHandle&&) noexcept;
  ~SamplerHandle();

  /// Halts collection and returns the complete trace. A second call throws
  /// Error(state).
  SamplerResult stop();

  /// Copy of the samples collected so far.
  ResourceTrace snapshot() const;

  /// Seconds since the run epoch, on the same clock as sample timestamps.
  double now() const;

  bool active() const;

 private:
  struct State;
  explicit SamplerHandle(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;

  friend SamplerHandle start_sampling(SamplerConfig config);
};

/// Validates the config and resolves counters before returning; throws
/// Error(not_found) for a missing process and Error(platform) for unreadable
/// counters. The first sample lands within one period.
SamplerHandle start_sampling(SamplerConfig config);

inline SamplerResult stop_sampling(SamplerHandle& handle) { return handle.stop(); }

/// procfs root in use ("/proc" unless CPULAB_PROC_ROOT is set).
std::filesystem::path proc_root();

}  // namespace cpulab

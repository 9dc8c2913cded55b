// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpulab {

struct ProcessResult {
  int exit_code = -1;     // valid when term_signal == 0
  int term_signal = 0;
  std::string out;
  std::string err;

  bool ok() const { return term_signal == 0 && exit_code == 0; }
};

/// Child process with piped stdin/stdout/stderr. Reads poll both output pipes
/// so a chatty stderr never blocks the child.
class Subprocess {
 public:
  /// Throws Error(backend) when the program cannot be executed.
  static Subprocess spawn(const std::vector<std::string>& argv);

  Subprocess(Subprocess&&) noexcept;
  Subprocess& operator=(Subprocess&&) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  int pid() const { return pid_; }
  bool running() const { return pid_ > 0; }

  /// Throws Error(backend) if the child closed its stdin.
  void write(std::string_view data);
  void close_stdin();

  /// Next '\n'-terminated stdout line (without the newline); nullopt on EOF or
  /// timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  /// stderr captured so far.
  const std::string& stderr_text() const { return err_; }

  /// Closes stdin, drains both pipes, reaps the child.
  ProcessResult wait();

  /// Writes `input`, then wait().
  ProcessResult communicate(std::string_view input);

  void kill();

 private:
  Subprocess() = default;
  bool pump(int timeout_ms);
  void close_all();

  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  std::string out_;
  std::string err_;
  std::string_view pending_in_;
};

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input = {});

}  // namespace cpulab

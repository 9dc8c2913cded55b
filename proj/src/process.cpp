// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "cpulab/error.hpp"

namespace cpulab {
namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

void make_pipe(int fds[2]) {
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::backend, std::string("pipe: ") + std::strerror(errno));
  }
}

}  // namespace

Subprocess Subprocess::spawn(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::backend, "empty command line");
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  int in[2], out[2], err[2], status[2];
  make_pipe(in);
  make_pipe(out);
  make_pipe(err);
  make_pipe(status);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::backend, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::dup2(err[1], STDERR_FILENO);
    ::execvp(cargv[0], cargv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(status[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);
  ::close(status[1]);

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(status[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(status[0]);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    ::close(in[1]);
    ::close(out[0]);
    ::close(err[0]);
    int st;
    ::waitpid(pid, &st, 0);
    throw Error(ErrorCode::backend, "cannot execute '" + argv[0] + "': " + std::strerror(child_errno));
  }

  Subprocess p;
  p.pid_ = pid;
  p.in_fd_ = in[1];
  p.out_fd_ = out[0];
  p.err_fd_ = err[0];
  return p;
}

Subprocess::Subprocess(Subprocess&& o) noexcept
    : pid_(o.pid_), in_fd_(o.in_fd_), out_fd_(o.out_fd_), err_fd_(o.err_fd_),
      out_(std::move(o.out_)), err_(std::move(o.err_)) {
  o.pid_ = o.in_fd_ = o.out_fd_ = o.err_fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& o) noexcept {
  if (this != &o) {
    kill();
    close_all();
    pid_ = o.pid_;
    in_fd_ = o.in_fd_;
    out_fd_ = o.out_fd_;
    err_fd_ = o.err_fd_;
    out_ = std::move(o.out_);
    err_ = std::move(o.err_);
    o.pid_ = o.in_fd_ = o.out_fd_ = o.err_fd_ = -1;
  }
  return *this;
}

Subprocess::~Subprocess() {
  kill();
  close_all();
}

void Subprocess::close_all() {
  close_fd(in_fd_);
  close_fd(out_fd_);
  close_fd(err_fd_);
}

void Subprocess::kill() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int st;
    ::waitpid(pid_, &st, 0);
    pid_ = -1;
  }
}

void Subprocess::write(std::string_view data) {
  if (in_fd_ < 0) throw Error(ErrorCode::backend, "stdin already closed");
  // A dead child must surface as an error, not SIGPIPE.
  struct sigaction ignore{}, previous{};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &previous);
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int e = errno;
      ::sigaction(SIGPIPE, &previous, nullptr);
      throw Error(ErrorCode::backend, std::string("write to backend failed: ") + std::strerror(e));
    }
    off += static_cast<std::size_t>(n);
  }
  ::sigaction(SIGPIPE, &previous, nullptr);
}

void Subprocess::close_stdin() { close_fd(in_fd_); }

// One poll round over stdout/stderr (and stdin while `pending_in_` holds
// unsent bytes). Returns false when both output pipes are closed.
bool Subprocess::pump(int timeout_ms) {
  pollfd fds[3];
  int n = 0;
  if (out_fd_ >= 0) fds[n++] = {out_fd_, POLLIN, 0};
  if (err_fd_ >= 0) fds[n++] = {err_fd_, POLLIN, 0};
  const bool feeding = in_fd_ >= 0 && !pending_in_.empty();
  if (feeding) fds[n++] = {in_fd_, POLLOUT, 0};
  if (n == 0) return false;
  const int r = ::poll(fds, static_cast<nfds_t>(n), timeout_ms);
  if (r < 0) return errno == EINTR;
  if (r == 0) return true;
  char buf[8192];
  for (int i = 0; i < n; ++i) {
    if (!fds[i].revents) continue;
    if (fds[i].fd == in_fd_) {
      const ssize_t put = ::write(in_fd_, pending_in_.data(), pending_in_.size());
      if (put < 0 && errno != EINTR && errno != EAGAIN) {
        pending_in_ = {};
        close_fd(in_fd_);
      } else if (put > 0) {
        pending_in_.remove_prefix(static_cast<std::size_t>(put));
        if (pending_in_.empty()) close_fd(in_fd_);
      }
      continue;
    }
    const ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
    const bool is_out = fds[i].fd == out_fd_;
    if (got <= 0) {
      if (is_out) close_fd(out_fd_);
      else close_fd(err_fd_);
    } else {
      (is_out ? out_ : err_).append(buf, static_cast<std::size_t>(got));
    }
  }
  return out_fd_ >= 0 || err_fd_ >= 0;
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = out_.find('\n'); nl != std::string::npos) {
      std::string line = out_.substr(0, nl);
      out_.erase(0, nl + 1);
      return line;
    }
    if (out_fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pump(static_cast<int>(left.count()));
  }
}

ProcessResult Subprocess::wait() {
  close_stdin();
  while (pump(-1)) {
  }
  ProcessResult r;
  r.out = std::move(out_);
  r.err = std::move(err_);
  out_.clear();
  err_.clear();
  if (pid_ > 0) {
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
    if (WIFEXITED(st)) r.exit_code = WEXITSTATUS(st);
    if (WIFSIGNALED(st)) r.term_signal = WTERMSIG(st);
  }
  close_all();
  return r;
}

ProcessResult Subprocess::communicate(std::string_view input) {
  if (in_fd_ >= 0 && !input.empty()) {
    struct sigaction ignore{}, previous{};
    ignore.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &ignore, &previous);
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);
    pending_in_ = input;
    while (!pending_in_.empty() && in_fd_ >= 0 && pump(-1)) {
    }
    pending_in_ = {};
    ::sigaction(SIGPIPE, &previous, nullptr);
  }
  return wait();
}

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input) {
  auto p = Subprocess::spawn(argv);
  return p.communicate(input);
}

}  // namespace cpulab

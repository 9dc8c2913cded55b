// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/sampler.hpp"

#include <fcntl.h>
#include <time.h>
#include <unistd.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stop_token>
#include <thread>
#include <unordered_map>
#include <vector>

#include "cpulab/error.hpp"
#include "cpulab/trace_io.hpp"

namespace cpulab {
namespace {

using Clock = std::chrono::steady_clock;

struct CpuTicks {
  unsigned long long busy = 0;
  unsigned long long total = 0;
};

std::optional<std::string> slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CpuTicks read_system_ticks(const std::filesystem::path& root) {
  auto text = slurp(root / "stat");
  if (!text) throw Error(ErrorCode::platform, "cannot read " + (root / "stat").string());
  std::istringstream in(*text);
  std::string label;
  in >> label;
  if (label != "cpu") throw Error(ErrorCode::platform, "unexpected format in " + (root / "stat").string());
  std::vector<unsigned long long> f;
  unsigned long long v;
  while (f.size() < 8 && in >> v) f.push_back(v);
  if (f.size() < 4) throw Error(ErrorCode::platform, "too few cpu fields in stat");
  f.resize(8, 0);
  // user nice system idle iowait irq softirq steal
  CpuTicks t;
  t.busy = f[0] + f[1] + f[2] + f[5] + f[6] + f[7];
  t.total = t.busy + f[3] + f[4];
  return t;
}

int count_cpus(const std::filesystem::path& root) {
  auto text = slurp(root / "stat");
  if (!text) return 1;
  std::istringstream in(*text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.size() > 3 && line.starts_with("cpu") && line[3] >= '0' && line[3] <= '9') ++n;
  }
  return n > 0 ? n : 1;
}

double read_system_ram_mb(const std::filesystem::path& root) {
  auto text = slurp(root / "meminfo");
  if (!text) throw Error(ErrorCode::platform, "cannot read " + (root / "meminfo").string());
  std::istringstream in(*text);
  std::string key;
  double total_kb = -1, avail_kb = -1, free_kb = -1;
  double value;
  std::string unit;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (!(ls >> key >> value)) continue;
    if (key == "MemTotal:") total_kb = value;
    else if (key == "MemAvailable:") avail_kb = value;
    else if (key == "MemFree:") free_kb = value;
  }
  if (total_kb < 0) throw Error(ErrorCode::platform, "MemTotal missing from meminfo");
  if (avail_kb < 0) avail_kb = free_kb >= 0 ? free_kb : 0;
  return std::max(0.0, (total_kb - avail_kb) / 1024.0);
}

struct ProcStat {
  int ppid = 0;
  unsigned long long ticks = 0;   // utime + stime + cutime + cstime
  long long rss_pages = 0;
};

std::optional<ProcStat> read_proc_stat(const std::filesystem::path& root, int pid) {
  auto text = slurp(root / std::to_string(pid) / "stat");
  if (!text) return std::nullopt;
  const auto close = text->rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream in(text->substr(close + 1));
  // Fields after the command: state(3) ppid(4) ... utime(14) stime(15)
  // cutime(16) cstime(17) ... rss(24).
  std::vector<std::string> f;
  std::string tok;
  while (f.size() < 22 && in >> tok) f.push_back(tok);
  if (f.size() < 22) return std::nullopt;
  ProcStat s;
  try {
    s.ppid = std::stoi(f[1]);
    s.ticks = std::stoull(f[11]) + std::stoull(f[12]) + std::stoull(f[13]) + std::stoull(f[14]);
    s.rss_pages = std::stoll(f[21]);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return s;
}

// utime + stime of one thread of `pid`.
std::optional<unsigned long long> read_thread_ticks(const std::filesystem::path& root, int pid, int tid) {
  auto text = slurp(root / std::to_string(pid) / "task" / std::to_string(tid) / "stat");
  if (!text) return std::nullopt;
  const auto close = text->rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream in(text->substr(close + 1));
  std::string tok;
  unsigned long long utime = 0, stime = 0;
  for (int field = 3; in >> tok && field <= 15; ++field) {
    try {
      if (field == 14) utime = std::stoull(tok);
      if (field == 15) stime = std::stoull(tok);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return utime + stime;
}

struct TreeReading {
  unsigned long long ticks = 0;
  double ram_mb = 0.0;
};

TreeReading read_tree(const std::filesystem::path& root, int pid) {
  std::unordered_map<int, std::vector<int>> children;
  std::unordered_map<int, ProcStat> stats;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
    const std::string name = entry.path().filename().string();
    int p = 0;
    auto [ptr, err] = std::from_chars(name.data(), name.data() + name.size(), p);
    if (err != std::errc{} || ptr != name.data() + name.size()) continue;
    if (auto s = read_proc_stat(root, p)) {
      children[s->ppid].push_back(p);
      stats.emplace(p, *s);
    }
  }
  TreeReading r;
  static const long page = sysconf(_SC_PAGESIZE);
  std::vector<int> stack{pid};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    auto it = stats.find(cur);
    if (it == stats.end()) continue;
    r.ticks += it->second.ticks;
    r.ram_mb += static_cast<double>(it->second.rss_pages) * static_cast<double>(page) / (1024.0 * 1024.0);
    if (auto c = children.find(cur); c != children.end()) {
      stack.insert(stack.end(), c->second.begin(), c->second.end());
    }
  }
  return r;
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// Incremental reader for a growing meter log.
class MeterTail {
 public:
  explicit MeterTail(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw Error(ErrorCode::not_found, "energy source not found: " + path.string());
  }
  MeterTail(const MeterTail&) = delete;
  MeterTail& operator=(const MeterTail&) = delete;
  ~MeterTail() {
    if (fd_ >= 0) ::close(fd_);
  }

  void poll(std::vector<PowerSample>& out, bool final) {
    char buf[4096];
    for (;;) {
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n <= 0) break;
      pending_.append(buf, static_cast<std::size_t>(n));
    }
    std::size_t pos = 0;
    for (;;) {
      const auto nl = pending_.find('\n', pos);
      if (nl == std::string::npos) break;
      consume(std::string_view(pending_).substr(pos, nl - pos), out);
      pos = nl + 1;
    }
    pending_.erase(0, pos);
    if (final && !pending_.empty()) {
      consume(pending_, out);
      pending_.clear();
    }
  }

 private:
  static void consume(std::string_view line, std::vector<PowerSample>& out) {
    try {
      if (auto s = parse_meter_line(line)) out.push_back(*s);
    } catch (const Error&) {
      // Torn or garbage meter lines are dropped; the meter keeps streaming.
    }
  }

  std::filesystem::path path_;
  int fd_ = -1;
  std::string pending_;
};

}  // namespace

std::filesystem::path proc_root() {
  if (const char* env = std::getenv("CPULAB_PROC_ROOT"); env && *env) return env;
  return "/proc";
}

void validate(const SamplerConfig& config) {
  if (!(config.rate_hz >= 1.0 && config.rate_hz <= 50.0)) {
    throw Error(ErrorCode::input, "sampling rate must be within [1, 50] Hz");
  }
}

struct SamplerHandle::State {
  SamplerConfig config;
  std::filesystem::path root;
  int pid = 0;
  int ncpu = 1;
  long clk_tck = 100;
  Clock::time_point epoch;

  mutable std::mutex mu;
  std::condition_variable_any cv;
  std::vector<ResourceSample> samples;
  std::vector<PowerSample> power;
  std::unique_ptr<MeterTail> meter;
  std::size_t missed = 0;
  double overhead_s = 0.0;

  CpuTicks last_sys{};
  unsigned long long last_tree = 0;
  // When the sampled tree contains this process, the collection thread's own
  // ticks are taken out so sampling cost does not show up as activity.
  std::atomic<int> worker_tid{0};
  unsigned long long worker_ticks = 0;
  double last_t = 0.0;

  std::atomic<bool> stopped{false};
  std::jthread worker;

  double elapsed(Clock::time_point tp) const {
    return std::chrono::duration<double>(tp - epoch).count();
  }

  void prime() {
    if (config.scope == SamplerScope::system) {
      last_sys = read_system_ticks(root);
    } else {
      last_tree = tree_ticks();
    }
    read_system_ram_mb(root);
  }

  unsigned long long own_ticks_removed(unsigned long long tree) {
    const int tid = worker_tid.load();
    if (tid > 0 && pid == static_cast<int>(::getpid())) {
      if (auto w = read_thread_ticks(root, pid, tid)) worker_ticks = *w;
    }
    return tree >= worker_ticks ? tree - worker_ticks : 0;
  }

  unsigned long long tree_ticks() { return own_ticks_removed(read_tree(root, pid).ticks); }

  ResourceSample take(double t) {
    ResourceSample s;
    s.t = t;
    const double dt = t - last_t;
    if (config.scope == SamplerScope::system) {
      const CpuTicks cur = read_system_ticks(root);
      const auto dtotal = cur.total - last_sys.total;
      s.cpu_pct = dtotal > 0 ? 100.0 * static_cast<double>(cur.busy - last_sys.busy) /
                                   static_cast<double>(dtotal)
                             : 0.0;
      last_sys = cur;
      s.ram_mb = read_system_ram_mb(root);
    } else {
      const TreeReading cur = read_tree(root, pid);
      const unsigned long long ticks = own_ticks_removed(cur.ticks);
      const double dticks = ticks >= last_tree ? static_cast<double>(ticks - last_tree) : 0.0;
      s.cpu_pct = dt > 0 ? 100.0 * dticks / (static_cast<double>(clk_tck) * dt * ncpu) : 0.0;
      last_tree = ticks;
      s.ram_mb = cur.ram_mb;
    }
    s.cpu_pct = std::clamp(s.cpu_pct, 0.0, 100.0);
    last_t = t;
    return s;
  }

  void record(double t) {
    ResourceSample s;
    try {
      s = take(t);
    } catch (const Error&) {
      return;  // counters vanished mid-run; skip this tick
    }
    std::lock_guard lock(mu);
    if (samples.empty() || s.t > samples.back().t) samples.push_back(s);
    if (meter) meter->poll(power, false);
  }

  void run(std::stop_token st) {
    worker_tid.store(static_cast<int>(::gettid()));
    const double cpu0 = thread_cpu_seconds();
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / config.rate_hz));
    std::uint64_t k = 1;
    std::mutex wait_mu;
    for (;;) {
      const auto target = epoch + period * static_cast<long long>(k);
      {
        std::unique_lock lock(wait_mu);
        cv.wait_until(lock, st, target, [] { return false; });
        if (st.stop_requested()) break;
      }
      const auto now = Clock::now();
      record(elapsed(now));
      ++k;
      // Skip ticks we slept through.
      const auto behind = (now - epoch) / period;
      if (static_cast<std::uint64_t>(behind) >= k) {
        std::lock_guard lock(mu);
        missed += static_cast<std::uint64_t>(behind) - k + 1;
        k = static_cast<std::uint64_t>(behind) + 1;
      }
    }
    std::lock_guard lock(mu);
    overhead_s = thread_cpu_seconds() - cpu0;
  }
};

SamplerHandle::SamplerHandle(std::unique_ptr<State> state) : state_(std::move(state)) {}
SamplerHandle::SamplerHandle(SamplerHandle&&) noexcept = default;
SamplerHandle& SamplerHandle::operator=(SamplerHandle&& other) noexcept {
  if (this != &other) {
    if (active()) {
      try {
        stop();
      } catch (...) {
      }
    }
    state_ = std::move(other.state_);
  }
  return *this;
}

SamplerHandle::~SamplerHandle() {
  if (active()) {
    try {
      stop();
    } catch (...) {
    }
  }
}

bool SamplerHandle::active() const { return state_ && !state_->stopped.load(); }

double SamplerHandle::now() const {
  if (!state_) return 0.0;
  return state_->elapsed(Clock::now());
}

ResourceTrace SamplerHandle::snapshot() const {
  if (!state_) throw Error(ErrorCode::state, "empty sampler handle");
  ResourceTrace trace;
  trace.nominal_rate_hz = state_->config.rate_hz;
  trace.device = state_->config.device;
  trace.run_id = state_->config.run_id;
  std::lock_guard lock(state_->mu);
  trace.samples = state_->samples;
  return trace;
}

SamplerResult SamplerHandle::stop() {
  if (!state_) throw Error(ErrorCode::state, "empty sampler handle");
  if (state_->stopped.exchange(true)) throw Error(ErrorCode::state, "sampler already stopped");
  const auto stop_time = Clock::now();
  state_->worker.request_stop();
  if (state_->worker.joinable()) state_->worker.join();

  SamplerResult result;
  {
    std::lock_guard lock(state_->mu);
    if (state_->samples.empty()) {
      // Start-then-stop still yields one sample covering the whole span.
      const double t = std::max(state_->elapsed(stop_time), 1e-6);
      try {
        state_->samples.push_back(state_->take(t));
      } catch (const Error&) {
      }
    }
    if (state_->meter) state_->meter->poll(state_->power, true);
    result.resources.samples = state_->samples;
    result.missed_ticks = state_->missed;
    result.overhead_cpu_s = state_->overhead_s;
  }
  result.resources.nominal_rate_hz = state_->config.rate_hz;
  result.resources.device = state_->config.device;
  result.resources.run_id = state_->config.run_id;
  result.wall_s = state_->elapsed(stop_time);
  if (state_->config.energy_source) {
    EnergyTrace e;
    e.samples = state_->power;
    e.device = state_->config.device;
    e.run_id = state_->config.run_id;
    result.energy = std::move(e);
  }
  return result;
}

SamplerHandle start_sampling(SamplerConfig config) {
  validate(config);
  auto st = std::make_unique<SamplerHandle::State>();
  st->root = proc_root();
  st->pid = config.pid > 0 ? config.pid : static_cast<int>(::getpid());
  st->ncpu = count_cpus(st->root);
  st->clk_tck = sysconf(_SC_CLK_TCK);
  if (config.scope == SamplerScope::process_tree) {
    if (!std::filesystem::exists(st->root / std::to_string(st->pid) / "stat")) {
      throw Error(ErrorCode::not_found, "no such process: " + std::to_string(st->pid));
    }
  }
  if (config.energy_source) st->meter = std::make_unique<MeterTail>(*config.energy_source);
  st->config = std::move(config);
  st->epoch = Clock::now();
  st->prime();
  auto* raw = st.get();
  st->worker = std::jthread([raw](std::stop_token token) { raw->run(token); });
  return SamplerHandle(std::move(st));
}

}  // namespace cpulab

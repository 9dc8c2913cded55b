// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpulab/error.hpp"
#include "cpulab/orchestrator.hpp"
#include "cpulab/process.hpp"

namespace cpulab {
namespace {

using nlohmann::json;

std::string tail(const std::string& text, std::size_t max = 2000) {
  return text.size() <= max ? text : "..." + text.substr(text.size() - max);
}

std::optional<std::int64_t> number_after(std::string_view line, std::string_view key) {
  const auto pos = line.find(key);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = line.substr(pos + key.size());
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '=' || rest.front() == ':')) {
    rest.remove_prefix(1);
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

// "… = 123.4 ms / 57 tokens" → 57
std::optional<std::int64_t> count_after_slash(std::string_view line) {
  const auto slash = line.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  std::string_view rest = line.substr(slash + 1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockParams p) : params_(p) {}

  Completion infer(const StepInput& step) override {
    const auto tokens = count_whitespace_tokens(step.prompt);
    spin_for(mock_busy_seconds(params_, tokens, step.resolution), params_.threads);
    Completion c;
    c.text = filler_text(std::min(params_.output_tokens, step.max_tokens));
    c.usage.prompt_tokens = tokens;
    c.usage.completion_tokens = count_whitespace_tokens(c.text);
    return c;
  }

  int launches() const override { return 0; }

 private:
  MockParams params_;
};

std::map<std::string, std::string> base_vars(const BackendSpec& spec) {
  return {{"model", spec.model_ref}, {"max_tokens", std::to_string(spec.max_tokens)},
          {"prompt_file", ""},       {"prompt", ""},
          {"image", ""},             {"width", ""},
          {"height", ""}};
}

class StatelessCliBackend final : public Backend {
 public:
  StatelessCliBackend(BackendSpec spec, std::filesystem::path work_dir)
      : spec_(std::move(spec)), work_dir_(std::move(work_dir)) {
    if (spec_.command.empty()) throw Error(ErrorCode::backend, "stateless backend needs a command template");
    std::filesystem::create_directories(work_dir_);
  }

  Completion infer(const StepInput& step) override {
    const auto prompt_file = work_dir_ / ("prompt_" + std::to_string(step.index) + ".txt");
    {
      std::ofstream out(prompt_file, std::ios::trunc);
      out << step.prompt;
    }
    auto vars = base_vars(spec_);
    vars["max_tokens"] = std::to_string(step.max_tokens);
    vars["prompt_file"] = prompt_file.string();
    vars["prompt"] = step.prompt;
    if (step.image) vars["image"] = step.image->string();
    if (step.resolution) {
      vars["width"] = std::to_string(step.resolution->width);
      vars["height"] = std::to_string(step.resolution->height);
    }
    const auto argv = expand_command(spec_.command, vars);
    ++launches_;
    ProcessResult r = run_process(argv);
    if (!r.ok()) {
      throw Error(ErrorCode::backend, "'" + argv.front() + "' failed (exit " + std::to_string(r.exit_code) +
                                          ", signal " + std::to_string(r.term_signal) + "): " + tail(r.err));
    }
    Completion c;
    c.usage = parse_usage(r.out + "\n" + r.err);
    c.text = strip_usage_lines(r.out);
    c.diagnostics = std::move(r.err);
    return c;
  }

  int launches() const override { return launches_; }

 private:
  BackendSpec spec_;
  std::filesystem::path work_dir_;
  int launches_ = 0;
};

// One long-lived runtime; requests and responses are JSON lines:
//   → {"id": 3, "prompt": "...", "image": "path" | null, "max_tokens": 256}
//   ← {"id": 3, "text": "...", "usage": {"prompt_tokens": N, "completion_tokens": M}}
// Non-JSON stdout lines are treated as log noise.
class PersistentSessionBackend final : public Backend {
 public:
  explicit PersistentSessionBackend(BackendSpec spec) : spec_(std::move(spec)) {
    if (spec_.command.empty()) throw Error(ErrorCode::backend, "persistent backend needs a command template");
  }

  ~PersistentSessionBackend() override { shutdown(); }

  Completion infer(const StepInput& step) override {
    if (!proc_) {
      proc_.emplace(Subprocess::spawn(expand_command(spec_.command, base_vars(spec_))));
      ++launches_;
    }
    json req = {{"id", step.index}, {"prompt", step.prompt}, {"max_tokens", step.max_tokens}};
    req["image"] = step.image ? json(step.image->string()) : json(nullptr);
    if (step.resolution) {
      req["width"] = step.resolution->width;
      req["height"] = step.resolution->height;
    }
    proc_->write(req.dump() + "\n");

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(spec_.timeout_s);
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw Error(ErrorCode::backend, "backend response timed out");
      auto line = proc_->read_line(left);
      if (!line) {
        const std::string err = proc_->stderr_text();
        proc_->kill();
        proc_.reset();
        throw Error(ErrorCode::backend, "no response from backend session (exited or timed out): " + tail(err));
      }
      json resp = json::parse(*line, nullptr, false);
      if (resp.is_discarded() || !resp.is_object() || !resp.contains("id")) continue;
      if (resp["id"].get<std::size_t>() != step.index) continue;
      if (resp.contains("error")) {
        throw Error(ErrorCode::backend, "backend error: " + resp["error"].dump());
      }
      Completion c;
      c.text = resp.value("text", "");
      const json& usage = resp.contains("usage") ? resp["usage"] : resp;
      if (usage.contains("prompt_tokens")) c.usage.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
      if (usage.contains("completion_tokens")) {
        c.usage.completion_tokens = usage["completion_tokens"].get<std::int64_t>();
      }
      return c;
    }
  }

  int launches() const override { return launches_; }

  void shutdown() override {
    if (proc_) {
      proc_->close_stdin();
      proc_->wait();
      proc_.reset();
    }
  }

 private:
  BackendSpec spec_;
  std::optional<Subprocess> proc_;
  int launches_ = 0;
};

}  // namespace

std::string_view to_string(BackendMode mode) {
  switch (mode) {
    case BackendMode::persistent_session: return "persistent";
    case BackendMode::stateless_cli: return "stateless";
    case BackendMode::mock: return "mock";
  }
  return "mock";
}

std::optional<BackendMode> parse_backend_mode(std::string_view text) {
  if (text == "persistent" || text == "persistent-session") return BackendMode::persistent_session;
  if (text == "stateless" || text == "stateless-cli") return BackendMode::stateless_cli;
  if (text == "mock") return BackendMode::mock;
  return std::nullopt;
}

BackendSpec mock_backend(const MockParams& params) {
  if (params.load_ms < 0 || params.per_token_ms < 0 || params.per_pixel_ns < 0 || params.output_tokens < 0) {
    throw Error(ErrorCode::input, "mock backend parameters must be nonnegative");
  }
  BackendSpec spec;
  spec.mode = BackendMode::mock;
  spec.model_ref = "mock";
  spec.mock = params;
  return spec;
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const std::filesystem::path& work_dir) {
  switch (spec.mode) {
    case BackendMode::mock: return std::make_unique<MockBackend>(spec.mock);
    case BackendMode::stateless_cli: return std::make_unique<StatelessCliBackend>(spec, work_dir);
    case BackendMode::persistent_session: return std::make_unique<PersistentSessionBackend>(spec);
  }
  throw Error(ErrorCode::input, "unknown backend mode");
}

std::vector<std::string> expand_command(const std::vector<std::string>& tmpl,
                                        const std::map<std::string, std::string>& vars) {
  std::vector<std::string> out;
  out.reserve(tmpl.size());
  for (const auto& arg : tmpl) {
    std::string s;
    for (std::size_t i = 0; i < arg.size();) {
      if (arg[i] == '{') {
        const auto close = arg.find('}', i);
        if (close != std::string::npos) {
          auto it = vars.find(arg.substr(i + 1, close - i - 1));
          if (it != vars.end()) {
            s += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      s += arg[i++];
    }
    out.push_back(std::move(s));
  }
  return out;
}

UsageCounts parse_usage(std::string_view text) {
  UsageCounts u;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find("[usage]") != std::string_view::npos) {
      if (auto v = number_after(line, "prompt_tokens")) u.prompt_tokens = v;
      if (auto v = number_after(line, "completion_tokens")) u.completion_tokens = v;
    } else if (line.find("prompt eval time") != std::string_view::npos) {
      if (auto v = count_after_slash(line)) u.prompt_tokens = v;
    } else if (line.find("eval time") != std::string_view::npos) {
      if (auto v = count_after_slash(line)) u.completion_tokens = v;
    }
    if (nl == text.size()) break;
  }
  return u;
}

std::string strip_usage_lines(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    if (last) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    if (!line.starts_with("[usage]")) {
      out.append(line);
      if (!last) out += '\n';
    }
    pos = nl + 1;
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

}  // namespace cpulab

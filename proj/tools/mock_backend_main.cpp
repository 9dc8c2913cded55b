// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

// Stand-in inference runtime for exercising the stateless and persistent
// backend adapters without a model.
//
//   one-shot:  cpulab-mock-backend --prompt-file p.txt [--width W --height H]
//              prints the completion, then "[usage] prompt_tokens=N completion_tokens=M"
//   session:   cpulab-mock-backend --serve
//              reads {"id","prompt","width","height","max_tokens"} lines,
//              answers {"id","text","usage":{...}} lines until EOF
//
// --load-ms is paid once per process (model load); the per-token and
// per-pixel costs are paid per request.

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpulab/mock_cost.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock inference backend", "cpulab-mock-backend"};
  cpulab::MockParams params;
  std::string clamp = "1024x720", prompt_file, prompt, model, launch_log;
  int width = 0, height = 0, max_tokens = 256, fail_code = 0;
  bool serve = false, chatty = false;
  app.add_option("--load-ms", params.load_ms, "Cost per process start");
  app.add_option("--per-token-ms", params.per_token_ms, "Cost per prompt token");
  app.add_option("--per-pixel-ns", params.per_pixel_ns, "Cost per effective pixel");
  app.add_option("--clamp", clamp, "Preprocessing clamp WxH")->capture_default_str();
  app.add_option("--output-tokens", params.output_tokens, "Completion length")->capture_default_str();
  app.add_option("--threads", params.threads, "Spinning threads (0: all cores)");
  app.add_option("--model", model, "Model file; must exist when given");
  app.add_option("--prompt-file", prompt_file, "Prompt text file");
  app.add_option("--prompt", prompt, "Prompt text");
  app.add_option("--width", width, "Image width");
  app.add_option("--height", height, "Image height");
  app.add_option("--max-tokens", max_tokens, "Generation limit")->capture_default_str();
  app.add_option("--launch-log", launch_log, "Append this process id to FILE");
  app.add_option("--fail", fail_code, "Exit immediately with this status after writing to stderr");
  app.add_flag("--serve", serve, "Persistent JSON-lines session");
  app.add_flag("--chatty", chatty, "Interleave non-JSON log lines on stdout");
  CLI11_PARSE(app, argc, argv);

  if (auto c = cpulab::parse_clamp(clamp)) {
    params.clamp = *c;
  } else {
    std::cerr << "bad --clamp " << clamp << "\n";
    return 2;
  }
  if (!launch_log.empty()) std::ofstream(launch_log, std::ios::app) << ::getpid() << '\n';
  if (fail_code != 0) {
    std::cerr << "mock backend: simulated failure\n";
    return fail_code;
  }
  if (!model.empty() && !std::ifstream(model)) {
    std::cerr << "mock backend: cannot load model '" << model << "'\n";
    return 1;
  }

  cpulab::spin_for(params.load_ms * 1e-3, params.threads);
  cpulab::MockParams per_request = params;
  per_request.load_ms = 0.0;

  auto run_one = [&](const std::string& text, int w, int h, int limit) {
    std::optional<cpulab::Resolution> image;
    if (w > 0 && h > 0) image = cpulab::Resolution{w, h};
    const auto tokens = cpulab::count_whitespace_tokens(text);
    cpulab::spin_for(cpulab::mock_busy_seconds(per_request, tokens, image), params.threads);
    return std::make_pair(tokens, cpulab::filler_text(std::min(params.output_tokens, limit)));
  };

  if (!serve) {
    const std::string text = prompt_file.empty() ? prompt : slurp(prompt_file);
    const auto [tokens, completion] = run_one(text, width, height, max_tokens);
    std::cout << completion << '\n';
    std::cout << "[usage] prompt_tokens=" << tokens
              << " completion_tokens=" << cpulab::count_whitespace_tokens(completion) << std::endl;
    return 0;
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    auto req = nlohmann::json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.is_object()) {
      std::cerr << "mock backend: ignoring malformed request\n";
      continue;
    }
    const auto [tokens, completion] =
        run_one(req.value("prompt", ""), req.value("width", 0), req.value("height", 0), req.value("max_tokens", 256));
    if (chatty) std::cout << "llama_print_timings: request done" << '\n';
    nlohmann::json resp = {{"id", req.value("id", 0)},
                           {"text", completion},
                           {"usage",
                            {{"prompt_tokens", tokens},
                             {"completion_tokens", cpulab::count_whitespace_tokens(completion)}}}};
    std::cout << resp.dump() << std::endl;
  }
  return 0;
}

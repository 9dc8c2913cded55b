// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cpulab/error.hpp"
#include "cpulab/orchestrator.hpp"

namespace cpulab {

std::vector<Resolution> plan_resolution_steps(Resolution source, int n, int min_width) {
  if (n < 1) throw Error(ErrorCode::input, "resolution sweep needs n >= 1");
  if (source.width < 1 || source.height < 1) throw Error(ErrorCode::input, "empty source image");
  if (min_width < 1 || min_width > source.width) {
    throw Error(ErrorCode::input, "min_width must lie in [1, source width]");
  }
  if (n == 1) return {source};

  std::vector<Resolution> steps;
  steps.reserve(static_cast<std::size_t>(n));
  const double w0 = source.width;
  const double stride = (w0 - min_width) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const int w = static_cast<int>(std::lround(w0 - i * stride));
    const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(w) * source.height / w0)));
    steps.push_back({w, h});
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (effective_pixels(steps[i]) >= effective_pixels(steps[i - 1])) {
      throw Error(ErrorCode::input, "resolution steps are not strictly decreasing (" + to_string(steps[i - 1]) +
                                        " then " + to_string(steps[i]) + ")");
    }
  }
  return steps;
}

ResolutionSweep build_resolution_sweep(const std::filesystem::path& image, int n, int min_width,
                                       const std::filesystem::path& frame_dir, std::string prompt_template,
                                       ClampSpec clamp) {
  const cv::Mat src = cv::imread(image.string(), cv::IMREAD_COLOR);
  if (src.empty()) throw Error(ErrorCode::input, "cannot read image: " + image.string());

  ResolutionSweep sweep;
  sweep.source_image = image;
  sweep.source = {src.cols, src.rows};
  sweep.steps = plan_resolution_steps(sweep.source, n, min_width);
  sweep.prompt_template = std::move(prompt_template);
  sweep.clamp = clamp;

  std::filesystem::create_directories(frame_dir);
  for (std::size_t i = 0; i < sweep.steps.size(); ++i) {
    const Resolution r = sweep.steps[i];
    cv::Mat frame;
    if (r == sweep.source) {
      frame = src;
    } else {
      cv::resize(src, frame, cv::Size(r.width, r.height), 0, 0, cv::INTER_AREA);
    }
    char name[64];
    std::snprintf(name, sizeof name, "frame_%02zu_%dx%d.png", i, r.width, r.height);
    const auto path = frame_dir / name;
    if (!cv::imwrite(path.string(), frame)) throw Error(ErrorCode::io, "cannot write frame: " + path.string());
    sweep.frames.push_back(path);
  }
  return sweep;
}

}  // namespace cpulab

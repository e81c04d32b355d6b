// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tsmlab/error.hpp"

namespace tsmlab {

// Per-pixel magnitude clamp for depth gradients. Each output keeps the
// input's sign and gets magnitude min(s_i, rate * |g_i|), where s_i comes
// from scale_map (entries <= 0 fall back to scale_fallback) or from
// scale_fallback everywhere when the map is empty.
struct DepthClipConfig {
  double rate = 0.1;
  double scale_fallback = 1.0;
  std::vector<double> scale_map;
  // When set, gradients whose scaled magnitude stays below s_i pass through
  // unscaled instead of being multiplied by rate.
  bool passthrough_normal = false;
};

std::vector<double> clip_depth(const std::vector<double>& grad,
                               const DepthClipConfig& config);

// Global L2 rescale: gradients with norm above max_norm are scaled down to
// it, everything else is untouched.
struct ColorClipConfig {
  double max_norm = 1.0;
};

std::vector<double> clip_color(const std::vector<double>& grad,
                               const ColorClipConfig& config);

}  // namespace tsmlab

// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/clipping.hpp"

#include <cmath>

namespace tsmlab {

std::vector<double> clip_depth(const std::vector<double>& grad,
                               const DepthClipConfig& config) {
  require(std::isfinite(config.rate) && config.rate > 0.0,
          ErrorCode::Parameter, "clip rate must be positive");
  require(std::isfinite(config.scale_fallback) && config.scale_fallback > 0.0,
          ErrorCode::Parameter, "clip scale fallback must be positive");
  require(config.scale_map.empty() || config.scale_map.size() == grad.size(),
          ErrorCode::Parameter, "clip scale map size mismatch");

  std::vector<double> out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double g = grad[i];
    double s = config.scale_fallback;
    if (!config.scale_map.empty() && config.scale_map[i] > 0.0) {
      s = config.scale_map[i];
    }
    double scaled = config.rate * std::fabs(g);
    if (scaled <= s) {
      out[i] = config.passthrough_normal ? g : std::copysign(scaled, g);
    } else {
      out[i] = std::copysign(s, g);
    }
  }
  return out;
}

std::vector<double> clip_color(const std::vector<double>& grad,
                               const ColorClipConfig& config) {
  require(std::isfinite(config.max_norm) && config.max_norm > 0.0,
          ErrorCode::Parameter, "clip max norm must be positive");
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  double norm = std::sqrt(sq);
  std::vector<double> out = grad;
  if (norm > config.max_norm) {
    double f = config.max_norm / norm;
    for (double& g : out) g *= f;
  }
  return out;
}

}  // namespace tsmlab

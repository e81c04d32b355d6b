// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/schedule.hpp"

#include <cmath>
#include <utility>

namespace tsmlab {

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bars)
    : alpha_bar_(std::move(alpha_bars)) {
  require(alpha_bar_.size() >= 2, ErrorCode::Parameter,
          "schedule needs at least one step");
  require(alpha_bar_[0] == 1.0, ErrorCode::Parameter,
          "alpha_bar[0] must be exactly 1");
  for (std::size_t i = 1; i < alpha_bar_.size(); ++i) {
    double a = alpha_bar_[i];
    require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorCode::Parameter,
            "alpha_bar values must lie in (0, 1]");
    require(a < alpha_bar_[i - 1], ErrorCode::Parameter,
            "alpha_bar must be strictly decreasing");
  }
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start,
                                    double beta_end) {
  require(steps >= 1, ErrorCode::Parameter, "steps must be >= 1");
  require(beta_start > 0.0 && beta_start < 1.0, ErrorCode::Parameter,
          "beta_start must lie in (0, 1)");
  require(beta_end > 0.0 && beta_end < 1.0, ErrorCode::Parameter,
          "beta_end must lie in (0, 1)");

  std::vector<double> ab(static_cast<std::size_t>(steps) + 1);
  ab[0] = 1.0;
  double running = 1.0;
  for (int i = 1; i <= steps; ++i) {
    double frac = steps > 1 ? static_cast<double>(i - 1) / (steps - 1) : 0.0;
    double beta = beta_start + (beta_end - beta_start) * frac;
    running *= 1.0 - beta;
    ab[static_cast<std::size_t>(i)] = running;
  }
  return NoiseSchedule(std::move(ab));
}

NoiseSchedule NoiseSchedule::from_alpha_bars(std::vector<double> alpha_bars) {
  return NoiseSchedule(std::move(alpha_bars));
}

double timestep_weight(WeightKind kind, const NoiseSchedule& schedule, int t) {
  require(t >= 1 && t <= schedule.steps(), ErrorCode::Index,
          "timestep_weight: t outside [1, T]");
  switch (kind) {
    case WeightKind::Constant:
      return 1.0;
    case WeightKind::SigmaWeighted:
      return 1.0 - schedule.alpha_bar(t);
  }
  raise(ErrorCode::Parameter, "unknown weight kind");
}

}  // namespace tsmlab

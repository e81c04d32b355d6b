// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tsmlab/error.hpp"

namespace tsmlab {

// Discrete-time variance schedule. Stores the cumulative signal fractions
// alpha_bar[0..T] with alpha_bar[0] = 1 and a strict decrease towards 0.
class NoiseSchedule {
 public:
  // Linear beta ramp: beta_i = beta_start + (beta_end - beta_start) * (i-1)/(T-1),
  // alpha_bar[t] = prod_{i<=t} (1 - beta_i). T = 1 uses beta_start only.
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);

  // Directly from precomputed cumulative products (index 0..T). Validates.
  static NoiseSchedule from_alpha_bars(std::vector<double> alpha_bars);

  int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }

  double alpha_bar(int t) const {
    require(t >= 0 && t <= steps(), ErrorCode::Index,
            "alpha_bar: timestep " + std::to_string(t) + " outside [0, " +
                std::to_string(steps()) + "]");
    return alpha_bar_[static_cast<std::size_t>(t)];
  }

  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  explicit NoiseSchedule(std::vector<double> alpha_bars);

  std::vector<double> alpha_bar_;
};

enum class WeightKind {
  Constant,       // w(t) = 1
  SigmaWeighted,  // w(t) = 1 - alpha_bar(t)
};

// Per-timestep loss weight, defined for 1 <= t <= T.
double timestep_weight(WeightKind kind, const NoiseSchedule& schedule, int t);

}  // namespace tsmlab

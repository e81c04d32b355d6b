// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "tsmlab/generator.hpp"

namespace tsmlab {

struct DensifyConfig {
  double tau_pos = 0.01;      // average positional gradient to act on
  double sigma_split = 4.0;   // major scale above which split beats clone
  double tau_opacity = 0.05;  // prune below
  int start_iter = 100;
  int end_iter = 1500;
  int interval = 100;
  double split_scale_divisor = 1.6;
  double split_offset = 1.0;  // child offset in units of the major sigma
};

void validate(const DensifyConfig& config);

// Running view-space positional gradient statistics, one slot per splat.
class DensifyStats {
 public:
  explicit DensifyStats(std::size_t count = 0) { resize(count); }

  void resize(std::size_t count);
  void accumulate(std::size_t splat, double view_pos_norm);
  void reset();

  std::size_t size() const { return sum_.size(); }
  int events(std::size_t splat) const;
  double average(std::size_t splat) const;  // 0 when no events recorded

 private:
  std::vector<double> sum_;
  std::vector<int> count_;
};

enum class DensifyOp { Clone, Split, Prune };

struct DensifyAction {
  DensifyOp op;
  std::size_t splat;
};

// Control rule, evaluated only at iterations hitting the window/interval
// gate; outside it the result is empty and stats are untouched. A firing
// pass resets stats. Prune wins over everything; splats above the average
// gradient threshold split when their major scale exceeds sigma_split and
// clone otherwise.
std::vector<DensifyAction> densify_decide(DensifyStats& stats,
                                          const SplatScene& scene,
                                          const DensifyConfig& config,
                                          int iter);

struct DensifyCounts {
  int clones = 0;
  int splits = 0;
  int prunes = 0;
};

// Applies actions to the scene: clones duplicate in place, splits replace
// the parent with two children (scales divided, offset +/- along the major
// axis), prunes drop the splat. Indices refer to the scene as passed in.
DensifyCounts densify_apply(SplatScene& scene,
                            const std::vector<DensifyAction>& actions,
                            const DensifyConfig& config);

}  // namespace tsmlab

// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/densify.hpp"

#include <cmath>

namespace tsmlab {

void validate(const DensifyConfig& c) {
  require(std::isfinite(c.tau_pos) && c.tau_pos > 0.0, ErrorCode::Parameter,
          "tau_pos must be positive");
  require(std::isfinite(c.sigma_split) && c.sigma_split > 0.0,
          ErrorCode::Parameter, "sigma_split must be positive");
  require(std::isfinite(c.tau_opacity) && c.tau_opacity >= 0.0 &&
              c.tau_opacity < 1.0,
          ErrorCode::Parameter, "tau_opacity must lie in [0, 1)");
  require(c.start_iter >= 0 && c.end_iter >= c.start_iter,
          ErrorCode::Parameter, "densify window must satisfy 0 <= start <= end");
  require(c.interval >= 1, ErrorCode::Parameter, "interval must be >= 1");
  require(std::isfinite(c.split_scale_divisor) && c.split_scale_divisor > 1.0,
          ErrorCode::Parameter, "split divisor must be > 1");
  require(std::isfinite(c.split_offset) && c.split_offset >= 0.0,
          ErrorCode::Parameter, "split offset must be >= 0");
}

void DensifyStats::resize(std::size_t count) {
  sum_.assign(count, 0.0);
  count_.assign(count, 0);
}

void DensifyStats::reset() {
  std::fill(sum_.begin(), sum_.end(), 0.0);
  std::fill(count_.begin(), count_.end(), 0);
}

void DensifyStats::accumulate(std::size_t splat, double view_pos_norm) {
  require(splat < sum_.size(), ErrorCode::Id, "accumulate: unknown splat id");
  require(std::isfinite(view_pos_norm) && view_pos_norm >= 0.0,
          ErrorCode::Parameter, "accumulate: bad gradient norm");
  sum_[splat] += view_pos_norm;
  count_[splat] += 1;
}

int DensifyStats::events(std::size_t splat) const {
  require(splat < count_.size(), ErrorCode::Id, "events: unknown splat id");
  return count_[splat];
}

double DensifyStats::average(std::size_t splat) const {
  require(splat < sum_.size(), ErrorCode::Id, "average: unknown splat id");
  if (count_[splat] == 0) return 0.0;
  return sum_[splat] / count_[splat];
}

std::vector<DensifyAction> densify_decide(DensifyStats& stats,
                                          const SplatScene& scene,
                                          const DensifyConfig& config,
                                          int iter) {
  validate(config);
  if (iter < config.start_iter || iter > config.end_iter) return {};
  if ((iter - config.start_iter) % config.interval != 0) return {};
  require(stats.size() == scene.size(), ErrorCode::Id,
          "densify_decide: stats and scene disagree on splat count");

  std::vector<DensifyAction> actions;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Splat& s = scene.splats[i];
    if (s.opacity() < config.tau_opacity) {
      actions.push_back({DensifyOp::Prune, i});
      continue;
    }
    if (stats.events(i) == 0) continue;
    if (stats.average(i) <= config.tau_pos) continue;
    Eigen::Vector2d sc = s.scale();
    bool large = std::max(sc[0], sc[1]) > config.sigma_split;
    actions.push_back({large ? DensifyOp::Split : DensifyOp::Clone, i});
  }
  stats.reset();
  return actions;
}

DensifyCounts densify_apply(SplatScene& scene,
                            const std::vector<DensifyAction>& actions,
                            const DensifyConfig& config) {
  validate(config);
  const std::size_t n = scene.size();
  // At most one action per splat.
  std::vector<char> what(n, 0);
  for (const auto& a : actions) {
    require(a.splat < n, ErrorCode::Id, "densify_apply: unknown splat id");
    require(what[a.splat] == 0, ErrorCode::Id,
            "densify_apply: conflicting actions for one splat");
    what[a.splat] = a.op == DensifyOp::Prune  ? 'p'
                    : a.op == DensifyOp::Split ? 's'
                                               : 'c';
  }

  DensifyCounts counts;
  std::vector<Splat> next;
  next.reserve(n + actions.size());
  const double log_div = std::log(config.split_scale_divisor);
  for (std::size_t i = 0; i < n; ++i) {
    const Splat& s = scene.splats[i];
    switch (what[i]) {
      case 'p':
        ++counts.prunes;
        break;
      case 'c': {
        ++counts.clones;
        next.push_back(s);
        next.push_back(s);
        break;
      }
      case 's': {
        ++counts.splits;
        Eigen::Vector2d sc = s.scale();
        double c = std::cos(s.rot), sn = std::sin(s.rot);
        Eigen::Vector2d major =
            sc[0] >= sc[1] ? Eigen::Vector2d(c, sn) : Eigen::Vector2d(-sn, c);
        double sigma = std::max(sc[0], sc[1]);
        Splat child = s;
        child.log_scale.array() -= log_div;
        Splat a = child, b = child;
        a.pos += config.split_offset * sigma * major;
        b.pos -= config.split_offset * sigma * major;
        next.push_back(a);
        next.push_back(b);
        break;
      }
      default:
        next.push_back(s);
    }
  }
  scene.splats = std::move(next);
  return counts;
}

}  // namespace tsmlab

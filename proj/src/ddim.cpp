// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/ddim.hpp"

#include <cmath>

namespace tsmlab {

namespace {

void check_range(const NoiseSchedule& schedule, int t, const char* who) {
  require(t >= 0 && t <= schedule.steps(), ErrorCode::Index,
          std::string(who) + ": timestep outside [0, T]");
}

// Shared update core. inside/outside pick which endpoint's noise
// coefficient appears inside the rescaled bracket and which is added back.
Eigen::VectorXd transport(const NoiseSchedule& schedule,
                          const Eigen::VectorXd& x, int t_from, int t_to,
                          const Eigen::VectorXd& eps, int t_inside,
                          int t_outside) {
  double ab_from = schedule.alpha_bar(t_from);
  double ab_to = schedule.alpha_bar(t_to);
  double ratio = std::sqrt(ab_to / ab_from);
  double c_inside = std::sqrt(1.0 - schedule.alpha_bar(t_inside));
  double c_outside = std::sqrt(1.0 - schedule.alpha_bar(t_outside));
  return ratio * (x - c_inside * eps) + c_outside * eps;
}

}  // namespace

Latent denoise_with(const NoiseSchedule& schedule, const Latent& x, int t_to,
                    const Eigen::VectorXd& eps) {
  check_range(schedule, x.t, "denoise");
  check_range(schedule, t_to, "denoise");
  require(t_to < x.t, ErrorCode::Ordering, "denoise: target must be below t");
  require(eps.size() == x.values.size(), ErrorCode::Parameter,
          "denoise: epsilon dimension mismatch");
  return {transport(schedule, x.values, x.t, t_to, eps, x.t, t_to), t_to};
}

Latent invert_with(const NoiseSchedule& schedule, const Latent& x, int t_to,
                   const Eigen::VectorXd& eps, FormulaMode mode) {
  check_range(schedule, x.t, "invert");
  check_range(schedule, t_to, "invert");
  require(t_to > x.t, ErrorCode::Ordering, "invert: target must be above t");
  require(eps.size() == x.values.size(), ErrorCode::Parameter,
          "invert: epsilon dimension mismatch");
  int inside = mode == FormulaMode::DdimStandard ? x.t : t_to;
  int outside = mode == FormulaMode::DdimStandard ? t_to : x.t;
  return {transport(schedule, x.values, x.t, t_to, eps, inside, outside),
          t_to};
}

Latent denoise_step(const DiffusionOracle& oracle, const Latent& x, int t_prev,
                    ConditionLabel y) {
  require(t_prev < x.t, ErrorCode::Ordering,
          "denoise_step: t_prev must be below t");
  Eigen::VectorXd eps = oracle.epsilon(x.values, x.t, y);
  return denoise_with(oracle.schedule(), x, t_prev, eps);
}

Latent invert_step(const DiffusionOracle& oracle, const Latent& x, int t_next,
                   FormulaMode mode) {
  require(t_next > x.t, ErrorCode::Ordering,
          "invert_step: t_next must be above t");
  Eigen::VectorXd eps = oracle.epsilon(x.values, x.t, ConditionLabel::null());
  return invert_with(oracle.schedule(), x, t_next, eps, mode);
}

Latent invert_trajectory(const DiffusionOracle& oracle, const Latent& x0,
                         int s, int delta_S, FormulaMode mode) {
  require(x0.t == 0, ErrorCode::Parameter,
          "invert_trajectory: input must sit at t = 0");
  check_range(oracle.schedule(), s, "invert_trajectory");
  require(delta_S >= 1, ErrorCode::Parameter,
          "invert_trajectory: stride must be >= 1");
  require(s % delta_S == 0, ErrorCode::Step,
          "invert_trajectory: stride must divide s");
  Latent x = x0;
  int n = s / delta_S;
  for (int i = 1; i <= n; ++i) {
    x = invert_step(oracle, x, i * delta_S, mode);
  }
  return x;
}

JumpResult jump(const DiffusionOracle& oracle, const Latent& xs, int target,
                FormulaMode mode) {
  check_range(oracle.schedule(), xs.t, "jump");
  check_range(oracle.schedule(), target, "jump");
  require(target >= xs.t, ErrorCode::Ordering,
          "jump: target must not be below s");
  Eigen::VectorXd eps = oracle.epsilon(xs.values, xs.t, ConditionLabel::null());
  if (target == xs.t) return {xs, eps};
  return {invert_with(oracle.schedule(), xs, target, eps, mode), eps};
}

int mu_timestep(double gamma, int s, int t) {
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0,
          ErrorCode::Parameter, "gamma must lie in [0, 1]");
  require(s < t, ErrorCode::Ordering, "mu_timestep: needs s < t");
  if (gamma == 0.0) return s;
  if (gamma == 1.0) return t;
  int mu = s + static_cast<int>(std::floor(gamma * (t - s) + 0.5));
  if (t - s >= 2) {
    mu = std::max(s + 1, std::min(t - 1, mu));
  }
  return mu;
}

}  // namespace tsmlab

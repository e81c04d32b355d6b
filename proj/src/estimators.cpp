// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/estimators.hpp"

#include <cmath>

namespace tsmlab {

namespace {

void check_clean(const Latent& x0) {
  require(x0.t == 0, ErrorCode::Parameter, "estimator input must sit at t = 0");
}

long long lattice_lo(const EstimatorConfig& c) {
  long long a = c.t_min - c.delta_T;  // >= 0 after resolve
  return (a + c.delta_S - 1) / c.delta_S;
}

long long lattice_hi(const EstimatorConfig& c) {
  return (static_cast<long long>(c.t_max) - c.delta_T) / c.delta_S;
}

}  // namespace

EstimatorConfig resolve(const EstimatorConfig& config,
                        const NoiseSchedule& schedule) {
  EstimatorConfig c = config;
  require(c.delta_T >= 1, ErrorCode::Parameter, "delta_T must be >= 1");
  require(c.delta_S >= 1, ErrorCode::Parameter, "delta_S must be >= 1");
  require(std::isfinite(c.gamma) && c.gamma >= 0.0 && c.gamma <= 1.0,
          ErrorCode::Parameter, "gamma must lie in [0, 1]");
  require(std::isfinite(c.guidance_scale) && c.guidance_scale >= 0.0,
          ErrorCode::Parameter, "guidance scale must be >= 0");
  int T = schedule.steps();
  if (c.t_min < 0) c.t_min = c.delta_T + 1;
  if (c.t_max < 0) c.t_max = T - 1;
  require(c.t_min >= std::max(1, c.delta_T), ErrorCode::Parameter,
          "t_min must be >= max(1, delta_T)");
  require(c.t_max <= T, ErrorCode::Parameter, "t_max must be <= T");
  require(c.t_min <= c.t_max, ErrorCode::Parameter, "t_min must be <= t_max");
  require(lattice_lo(c) <= lattice_hi(c), ErrorCode::Parameter,
          "no admissible timestep in [t_min, t_max] for this stride");
  return c;
}

int sample_timestep(const EstimatorConfig& config,
                    const NoiseSchedule& schedule, std::mt19937_64& rng) {
  EstimatorConfig c = resolve(config, schedule);
  std::uniform_int_distribution<long long> dist(lattice_lo(c), lattice_hi(c));
  return static_cast<int>(c.delta_T + dist(rng) * c.delta_S);
}

Eigen::VectorXd sample_standard_normal(int dim, std::mt19937_64& rng) {
  require(dim >= 1, ErrorCode::Parameter, "dim must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) out[i] = normal(rng);
  return out;
}

Eigen::VectorXd conditional_term(const DiffusionOracle& oracle,
                                 const Eigen::VectorXd& x, int t,
                                 ConditionLabel y, double guidance_scale) {
  if (guidance_scale > 1.0) return oracle.epsilon_cfg(x, t, y, guidance_scale);
  return oracle.epsilon(x, t, y);
}

LatentGradient sds_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed) {
  check_clean(x0);
  EstimatorConfig c = resolve(config, oracle.schedule());
  std::mt19937_64 rng(seed);
  int t = sample_timestep(c, oracle.schedule(), rng);
  Eigen::VectorXd eps =
      sample_standard_normal(static_cast<int>(x0.values.size()), rng);

  double ab = oracle.schedule().alpha_bar(t);
  Eigen::VectorXd x_t = std::sqrt(ab) * x0.values + std::sqrt(1.0 - ab) * eps;
  Eigen::VectorXd cond = conditional_term(oracle, x_t, t, y, c.guidance_scale);
  double w = timestep_weight(c.weight, oracle.schedule(), t);

  LatentGradient g;
  g.values = w * (cond - eps);
  g.loss_proxy = 0.5 * (cond - eps).squaredNorm();
  g.t = t;
  g.s = t - c.delta_T;
  g.mu = g.s;
  return g;
}

LatentGradient ism_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed) {
  check_clean(x0);
  EstimatorConfig c = resolve(config, oracle.schedule());
  std::mt19937_64 rng(seed);
  int t = sample_timestep(c, oracle.schedule(), rng);
  int s = t - c.delta_T;

  Latent xs = invert_trajectory(oracle, x0, s, c.delta_S, c.mode);
  JumpResult to_t = jump(oracle, xs, t, c.mode);
  Eigen::VectorXd cond =
      conditional_term(oracle, to_t.latent.values, t, y, c.guidance_scale);
  double w = timestep_weight(c.weight, oracle.schedule(), t);

  LatentGradient g;
  g.values = w * (cond - to_t.eps);
  g.loss_proxy = w * 0.5 * (cond - to_t.eps).squaredNorm();
  g.t = t;
  g.s = s;
  g.mu = s;
  return g;
}

LatentGradient tsm_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed) {
  check_clean(x0);
  EstimatorConfig c = resolve(config, oracle.schedule());
  std::mt19937_64 rng(seed);
  int t = sample_timestep(c, oracle.schedule(), rng);
  int s = t - c.delta_T;
  int mu = mu_timestep(c.gamma, s, t);

  Latent xs = invert_trajectory(oracle, x0, s, c.delta_S, c.mode);
  JumpResult to_t = jump(oracle, xs, t, c.mode);
  JumpResult to_mu = jump(oracle, xs, mu, c.mode);
  Eigen::VectorXd eps_mu =
      oracle.epsilon(to_mu.latent.values, mu, ConditionLabel::null());
  Eigen::VectorXd cond =
      conditional_term(oracle, to_t.latent.values, t, y, c.guidance_scale);
  double w = timestep_weight(c.weight, oracle.schedule(), t);

  LatentGradient g;
  g.values = w * (cond - eps_mu);
  g.loss_proxy = w * 0.5 * (cond - eps_mu).squaredNorm();
  g.t = t;
  g.s = s;
  g.mu = mu;
  return g;
}

GapMetrics gap_metrics(const DiffusionOracle& oracle, const Latent& x0,
                       const EstimatorConfig& config, std::uint64_t seed) {
  check_clean(x0);
  EstimatorConfig c = resolve(config, oracle.schedule());
  std::mt19937_64 rng(seed);
  int t = sample_timestep(c, oracle.schedule(), rng);
  int s = t - c.delta_T;
  int mu = mu_timestep(c.gamma, s, t);

  Latent xs = invert_trajectory(oracle, x0, s, c.delta_S, c.mode);
  JumpResult to_t = jump(oracle, xs, t, c.mode);
  JumpResult to_mu = jump(oracle, xs, mu, c.mode);

  GapMetrics m;
  m.gap_ism = (to_t.latent.values - xs.values).norm();
  m.gap_tsm = (to_t.latent.values - to_mu.latent.values).norm();
  m.t = t;
  m.s = s;
  m.mu = mu;
  return m;
}

}  // namespace tsmlab

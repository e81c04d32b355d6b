// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "tsmlab/ddim.hpp"

namespace tsmlab {

struct EstimatorConfig {
  int delta_T = 100;      // jump width t - s
  int delta_S = 50;       // inversion stride
  double gamma = 0.3;     // offset rate for the second jump target
  int t_min = -1;         // sampling lower bound; < 0 resolves to delta_T + 1
  int t_max = -1;         // sampling upper bound; < 0 resolves to T - 1
  double guidance_scale = 7.5;
  FormulaMode mode = FormulaMode::DdimStandard;
  WeightKind weight = WeightKind::Constant;
};

// Fill defaulted bounds against a schedule and validate everything,
// including that at least one admissible timestep exists.
EstimatorConfig resolve(const EstimatorConfig& config,
                        const NoiseSchedule& schedule);

// Timesteps are drawn uniformly from the lattice
//   { t in [t_min, t_max] : (t - delta_T) mod delta_S == 0 },
// so the inversion endpoint s = t - delta_T is always reachable in whole
// strides. All estimators consume exactly one draw from the engine for
// this, which keeps matched seeds on matched instances.
int sample_timestep(const EstimatorConfig& config,
                    const NoiseSchedule& schedule, std::mt19937_64& rng);

Eigen::VectorXd sample_standard_normal(int dim, std::mt19937_64& rng);

// epsilon_cfg when guidance_scale > 1, otherwise the bare conditional
// epsilon(x, t, y).
Eigen::VectorXd conditional_term(const DiffusionOracle& oracle,
                                 const Eigen::VectorXd& x, int t,
                                 ConditionLabel y, double guidance_scale);

struct LatentGradient {
  Eigen::VectorXd values;  // d loss / d x0
  double loss_proxy = 0.0;
  int t = 0;
  int s = 0;
  int mu = 0;
};

// Score distillation on a forward-noised sample: one normal draw follows
// the timestep draw on the same engine.
LatentGradient sds_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed);

// Interval matching: invert x0 to s, jump to t with a shared epsilon, and
// compare the conditional term at t against that epsilon.
LatentGradient ism_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed);

// Trajectory matching: same inversion, two jumps from x_s to t and to
// mu = s + gamma*(t-s) reusing one epsilon, unconditional re-evaluation
// at mu. gamma = 0 reproduces the interval estimator exactly.
LatentGradient tsm_gradient(const DiffusionOracle& oracle, const Latent& x0,
                            ConditionLabel y, const EstimatorConfig& config,
                            std::uint64_t seed);

struct GapMetrics {
  double gap_ism = 0.0;  // || x_t - x_s ||
  double gap_tsm = 0.0;  // || x_t - x_mu ||
  int t = 0;
  int s = 0;
  int mu = 0;
};

// Drift bounds for both estimators on the instance the seed selects.
GapMetrics gap_metrics(const DiffusionOracle& oracle, const Latent& x0,
                       const EstimatorConfig& config, std::uint64_t seed);

}  // namespace tsmlab

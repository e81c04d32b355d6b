// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "tsmlab/oracle.hpp"

namespace tsmlab {

// State vector tagged with its timestep.
struct Latent {
  Eigen::VectorXd values;
  int t = 0;
};

// Coefficient placement in the inversion-direction update.
//   DdimStandard: x_b = sqrt(ab_b/ab_a) (x_a - sqrt(1-ab_a) e) + sqrt(1-ab_b) e
//   SigmaSwapped: x_b = sqrt(ab_b/ab_a) (x_a - sqrt(1-ab_b) e) + sqrt(1-ab_a) e
// The denoise update has one standard form shared by both modes.
enum class FormulaMode { DdimStandard, SigmaSwapped };

// Deterministic transport with a caller-supplied noise estimate. These are
// the algebraic cores; the *_step functions below query the oracle.
Latent denoise_with(const NoiseSchedule& schedule, const Latent& x, int t_to,
                    const Eigen::VectorXd& eps);
Latent invert_with(const NoiseSchedule& schedule, const Latent& x, int t_to,
                   const Eigen::VectorXd& eps, FormulaMode mode);

// One denoise step t -> t_prev using epsilon(x, t, y).
Latent denoise_step(const DiffusionOracle& oracle, const Latent& x, int t_prev,
                    ConditionLabel y);

// One inversion step t -> t_next using the unconditional epsilon(x, t).
Latent invert_step(const DiffusionOracle& oracle, const Latent& x, int t_next,
                   FormulaMode mode);

// Deterministic inversion from a clean latent (t = 0) to timestep s in
// uniform strides of delta_S (delta_S must divide s). Each stride reuses
// the epsilon evaluated at its start point.
Latent invert_trajectory(const DiffusionOracle& oracle, const Latent& x0,
                         int s, int delta_S, FormulaMode mode);

struct JumpResult {
  Latent latent;
  Eigen::VectorXd eps;  // the single unconditional epsilon(x_s, s) used
};

// Single-stride jump from x_s to target >= s, reusing one epsilon
// evaluation. target == s returns the input unchanged.
JumpResult jump(const DiffusionOracle& oracle, const Latent& xs, int target,
                FormulaMode mode);

// Offset timestep mu between s and t: gamma = 0 gives s, gamma = 1 gives t,
// otherwise round(s + gamma*(t-s)) clamped into the open interval when one
// exists.
int mu_timestep(double gamma, int s, int t);

}  // namespace tsmlab

// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "tsmlab/error.hpp"
#include "tsmlab/schedule.hpp"

namespace tsmlab {

// Condition under which the denoiser is queried: either the unconditional
// branch or one of the named mixture labels.
class ConditionLabel {
 public:
  static ConditionLabel null() { return ConditionLabel(-1); }
  static ConditionLabel label(int index) {
    require(index >= 0, ErrorCode::Condition, "label index must be >= 0");
    return ConditionLabel(index);
  }

  bool is_null() const { return index_ < 0; }
  int index() const {
    require(!is_null(), ErrorCode::Condition, "null label has no index");
    return index_;
  }

  friend bool operator==(ConditionLabel a, ConditionLabel b) {
    return a.index_ == b.index_;
  }
  friend bool operator!=(ConditionLabel a, ConditionLabel b) {
    return !(a == b);
  }
  friend bool operator<(ConditionLabel a, ConditionLabel b) {
    return a.index_ < b.index_;
  }

 private:
  explicit ConditionLabel(int index) : index_(index) {}
  int index_;
};

struct MixtureComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  double variance = 1.0;  // isotropic
};

// Isotropic Gaussian mixture over clean data.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<MixtureComponent> components);

  int dim() const { return static_cast<int>(components_[0].mean.size()); }
  const std::vector<MixtureComponent>& components() const {
    return components_;
  }
  // Weighted mean of the mixture; used as the distillation target point.
  Eigen::VectorXd mean() const;

 private:
  std::vector<MixtureComponent> components_;
};

// Closed-form denoiser over Gaussian mixtures. For a mixture with components
// (w_k, m_k, s_k^2), the noised marginal at time t is the mixture of
// N(sqrt(ab_t) m_k, (ab_t s_k^2 + 1 - ab_t) I) and
//   epsilon(x, t) = -sqrt(1 - ab_t) * grad_x log q_t(x).
class DiffusionOracle {
 public:
  DiffusionOracle(NoiseSchedule schedule,
                  std::map<ConditionLabel, MixtureSpec> mixtures);

  const NoiseSchedule& schedule() const { return schedule_; }
  int dim() const;

  bool has_label(ConditionLabel y) const {
    return mixtures_.find(y) != mixtures_.end();
  }
  const MixtureSpec& mixture(ConditionLabel y) const;

  // Noise prediction at timestep t (0 <= t <= T). t = 0 is allowed and
  // returns the zero vector scaled into the formula (prefactor is 0).
  Eigen::VectorXd epsilon(const Eigen::VectorXd& x, int t,
                          ConditionLabel y) const;

  // Guided prediction eps_null + scale * (eps_y - eps_null).
  Eigen::VectorXd epsilon_cfg(const Eigen::VectorXd& x, int t,
                              ConditionLabel y, double guidance_scale) const;

 private:
  NoiseSchedule schedule_;
  std::map<ConditionLabel, MixtureSpec> mixtures_;
};

}  // namespace tsmlab

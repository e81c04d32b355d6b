// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/oracle.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace tsmlab {

MixtureSpec::MixtureSpec(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), ErrorCode::Parameter,
          "mixture needs at least one component");
  double total = 0.0;
  Eigen::Index dim = components_[0].mean.size();
  require(dim >= 1, ErrorCode::Parameter, "component mean must be non-empty");
  for (const auto& c : components_) {
    require(c.mean.size() == dim, ErrorCode::Parameter,
            "all component means must share one dimension");
    require(std::isfinite(c.weight) && c.weight > 0.0, ErrorCode::Parameter,
            "component weights must be positive");
    require(std::isfinite(c.variance) && c.variance > 0.0,
            ErrorCode::Parameter, "component variances must be positive");
    total += c.weight;
  }
  for (auto& c : components_) c.weight /= total;
}

Eigen::VectorXd MixtureSpec::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

DiffusionOracle::DiffusionOracle(NoiseSchedule schedule,
                                 std::map<ConditionLabel, MixtureSpec> mixtures)
    : schedule_(std::move(schedule)), mixtures_(std::move(mixtures)) {
  require(mixtures_.find(ConditionLabel::null()) != mixtures_.end(),
          ErrorCode::Parameter, "oracle requires an unconditional mixture");
  int d = mixtures_.at(ConditionLabel::null()).dim();
  for (const auto& [label, spec] : mixtures_) {
    (void)label;
    require(spec.dim() == d, ErrorCode::Parameter,
            "all mixtures must share one dimension");
  }
}

int DiffusionOracle::dim() const {
  return mixtures_.at(ConditionLabel::null()).dim();
}

const MixtureSpec& DiffusionOracle::mixture(ConditionLabel y) const {
  auto it = mixtures_.find(y);
  require(it != mixtures_.end(), ErrorCode::Condition,
          "unknown condition label");
  return it->second;
}

Eigen::VectorXd DiffusionOracle::epsilon(const Eigen::VectorXd& x, int t,
                                         ConditionLabel y) const {
  require(t >= 0 && t <= schedule_.steps(), ErrorCode::Index,
          "epsilon: timestep outside [0, T]");
  const MixtureSpec& spec = mixture(y);
  require(x.size() == spec.dim(), ErrorCode::Parameter,
          "epsilon: input dimension mismatch");

  double ab = schedule_.alpha_bar(t);
  double sq_ab = std::sqrt(ab);
  double noise_scale = std::sqrt(1.0 - ab);
  const auto& comps = spec.components();
  const auto n = comps.size();

  // Posterior responsibilities of the noised components via log-sum-exp.
  Eigen::VectorXd log_terms(static_cast<Eigen::Index>(n));
  std::vector<double> variances(n);
  const double d = static_cast<double>(x.size());
  for (std::size_t k = 0; k < n; ++k) {
    double v = ab * comps[k].variance + (1.0 - ab);
    variances[k] = v;
    double sq_norm = (x - sq_ab * comps[k].mean).squaredNorm();
    log_terms[static_cast<Eigen::Index>(k)] =
        std::log(comps[k].weight) - 0.5 * d * std::log(v) - 0.5 * sq_norm / v;
  }
  double max_log = log_terms.maxCoeff();
  Eigen::VectorXd resp = (log_terms.array() - max_log).exp();
  resp /= resp.sum();

  // score(x) = sum_k r_k (sqrt(ab) m_k - x) / v_k; epsilon = -noise_scale * score.
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < n; ++k) {
    score += resp[static_cast<Eigen::Index>(k)] / variances[k] *
             (sq_ab * comps[k].mean - x);
  }
  return -noise_scale * score;
}

Eigen::VectorXd DiffusionOracle::epsilon_cfg(const Eigen::VectorXd& x, int t,
                                             ConditionLabel y,
                                             double guidance_scale) const {
  require(std::isfinite(guidance_scale) && guidance_scale >= 0.0,
          ErrorCode::Parameter, "guidance scale must be >= 0");
  require(!y.is_null(), ErrorCode::Condition,
          "guided prediction needs a non-null label");
  Eigen::VectorXd eps_null = epsilon(x, t, ConditionLabel::null());
  Eigen::VectorXd eps_y = epsilon(x, t, y);
  return eps_null + guidance_scale * (eps_y - eps_null);
}

}  // namespace tsmlab

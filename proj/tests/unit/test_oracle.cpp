// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "test_support.hpp"
#include "tsmlab/oracle.hpp"

using namespace tsmlab;
using namespace tsmlab::testing;

namespace {

MixtureComponent comp(double weight, std::initializer_list<double> mean,
                      double variance) {
  MixtureComponent c;
  c.weight = weight;
  c.mean = vec(mean);
  c.variance = variance;
  return c;
}

double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

// Independent 1-D reference: integrate the definition of the noised marginal
//   q_t(x) = integral p0(u) N(x; sqrt(ab) u, 1 - ab) du
// with composite Simpson and report eps = -sqrt(1-ab) * d/dx log q_t(x).
double quadrature_epsilon(const std::vector<MixtureComponent>& comps,
                          double alpha_bar, double x) {
  double wsum = 0.0;
  for (const auto& c : comps) wsum += c.weight;

  const double root_ab = std::sqrt(alpha_bar);
  const double noise_var = 1.0 - alpha_bar;

  double lo = 1e300, hi = -1e300, sigma_min = 1e300;
  for (const auto& c : comps) {
    const double sigma = std::sqrt(c.variance);
    lo = std::min(lo, c.mean[0] - 14.0 * sigma);
    hi = std::max(hi, c.mean[0] + 14.0 * sigma);
    sigma_min = std::min(sigma_min, sigma);
  }
  // Also cover the kernel's preimage around u = x / sqrt(ab).
  const double kernel_width = std::sqrt(noise_var) / root_ab;
  lo = std::min(lo, x / root_ab - 14.0 * kernel_width);
  hi = std::max(hi, x / root_ab + 14.0 * kernel_width);

  const double h_target = std::min(sigma_min, kernel_width) / 40.0;
  long long n = static_cast<long long>(std::ceil((hi - lo) / h_target));
  n = std::min<long long>(std::max<long long>(n, 2000), 4000000);
  if (n % 2 == 1) ++n;
  const double h = (hi - lo) / static_cast<double>(n);

  double density = 0.0, density_dx = 0.0;
  for (long long i = 0; i <= n; ++i) {
    const double u = lo + h * static_cast<double>(i);
    double p0 = 0.0;
    for (const auto& c : comps)
      p0 += (c.weight / wsum) * normal_pdf(u, c.mean[0], c.variance);
    const double kernel = normal_pdf(x, root_ab * u, noise_var);
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    density += weight * p0 * kernel;
    density_dx += weight * p0 * kernel * (root_ab * u - x) / noise_var;
  }
  density *= h / 3.0;
  density_dx *= h / 3.0;
  return -std::sqrt(noise_var) * density_dx / density;
}

DiffusionOracle oracle_1d(NoiseSchedule schedule,
                          std::vector<MixtureComponent> comps) {
  std::map<ConditionLabel, MixtureSpec> mixtures;
  mixtures.emplace(ConditionLabel::null(), MixtureSpec(std::move(comps)));
  return DiffusionOracle(std::move(schedule), std::move(mixtures));
}

}  // namespace

TEST_CASE("standard normal data gives eps = sqrt(1-ab) * x") {
  const NoiseSchedule sched = NoiseSchedule::linear(100, 1e-3, 0.05);
  const DiffusionOracle oracle = standard_normal_oracle(sched, 4);
  for (int t : {1, 17, 50, 100}) {
    const Eigen::VectorXd x = random_vec(4, 1000 + static_cast<unsigned>(t));
    const Eigen::VectorXd got = oracle.epsilon(x, t, ConditionLabel::null());
    const Eigen::VectorXd want = std::sqrt(1.0 - sched.alpha_bar(t)) * x;
    CAPTURE(t);
    CHECK(rel_diff(got, want) <= 1e-14);
  }
}

TEST_CASE("single-component closed form") {
  // eps = sqrt(1-ab) * (x - sqrt(ab) m) / (ab s^2 + 1 - ab)
  const NoiseSchedule sched = NoiseSchedule::linear(60, 1e-3, 0.08);
  const Eigen::VectorXd m = vec({0.3, -1.2, 2.0});
  const double var = 0.7;
  MixtureComponent c;
  c.weight = 2.5;  // normalization must not matter for one component
  c.mean = m;
  c.variance = var;
  std::map<ConditionLabel, MixtureSpec> mixtures;
  mixtures.emplace(ConditionLabel::null(), MixtureSpec({c}));
  const DiffusionOracle oracle(sched, std::move(mixtures));

  for (int t : {1, 20, 60}) {
    const double ab = sched.alpha_bar(t);
    const Eigen::VectorXd x = random_vec(3, 77 + static_cast<unsigned>(t));
    const Eigen::VectorXd want = std::sqrt(1.0 - ab) *
                                 (x - std::sqrt(ab) * m) /
                                 (ab * var + 1.0 - ab);
    CHECK(rel_diff(oracle.epsilon(x, t, ConditionLabel::null()), want) <=
          1e-14);
  }
}

TEST_CASE("symmetric mixture has exactly zero eps at the origin") {
  const NoiseSchedule sched = NoiseSchedule::linear(50, 1e-3, 0.05);
  const Eigen::VectorXd m = vec({1.5, -0.5});
  MixtureComponent a = comp(1.0, {0, 0}, 0.4);
  a.mean = m;
  MixtureComponent b = a;
  b.mean = -m;
  const DiffusionOracle oracle = oracle_1d(sched, {a, b});
  // oracle_1d names the helper; dim here is 2 via the component means.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  for (int t : {1, 25, 50})
    CHECK(oracle.epsilon(zero, t, ConditionLabel::null()).norm() == 0.0);
}

TEST_CASE("near-delta mixture approaches the pure-noise residual") {
  // var -> 0: eps(x, t) -> (x - sqrt(ab) m) / sqrt(1 - ab)
  const NoiseSchedule sched = NoiseSchedule::linear(80, 1e-3, 0.05);
  const Eigen::VectorXd m = vec({0.8, -0.3, 0.1});
  MixtureComponent c;
  c.weight = 1.0;
  c.mean = m;
  c.variance = 1e-16;
  std::map<ConditionLabel, MixtureSpec> mixtures;
  mixtures.emplace(ConditionLabel::null(), MixtureSpec({c}));
  const DiffusionOracle oracle(sched, std::move(mixtures));
  for (int t : {5, 40, 80}) {
    const double ab = sched.alpha_bar(t);
    const Eigen::VectorXd x = random_vec(3, 3000 + static_cast<unsigned>(t));
    const Eigen::VectorXd want = (x - std::sqrt(ab) * m) / std::sqrt(1.0 - ab);
    CHECK(rel_diff(oracle.epsilon(x, t, ConditionLabel::null()), want) <=
          1e-9);
  }
}

TEST_CASE("closed form agrees with direct quadrature of the definition") {
  const NoiseSchedule sched = NoiseSchedule::linear(200, 1e-4, 0.02);
  const std::vector<std::vector<MixtureComponent>> mixtures = {
      {comp(1.0, {0.7}, 1.3)},
      {comp(0.3, {-1.5}, 0.4), comp(0.7, {2.0}, 1.1)},
      {comp(2.0, {-2.0}, 0.25), comp(1.0, {0.0}, 1.0),
       comp(1.0, {1.2}, 0.5)}};
  for (std::size_t mi = 0; mi < mixtures.size(); ++mi) {
    const DiffusionOracle oracle = oracle_1d(sched, mixtures[mi]);
    for (int t : {1, 25, 120, 199}) {
      for (double xv : {-3.0, -1.1, 0.0, 0.45, 2.8}) {
        CAPTURE(mi);
        CAPTURE(t);
        CAPTURE(xv);
        const Eigen::VectorXd x = vec({xv});
        const double closed =
            oracle.epsilon(x, t, ConditionLabel::null())[0];
        const double quad =
            quadrature_epsilon(mixtures[mi], sched.alpha_bar(t), xv);
        CHECK(std::abs(closed - quad) <=
              1e-7 * std::max(1.0, std::abs(closed)));
      }
    }
  }
}

TEST_CASE("eps at t = 0 is exactly zero") {
  const NoiseSchedule sched = NoiseSchedule::linear(40, 1e-3, 0.05);
  const DiffusionOracle oracle = standard_normal_oracle(sched, 3);
  const Eigen::VectorXd x = random_vec(3, 9);
  CHECK(oracle.epsilon(x, 0, ConditionLabel::null()).norm() == 0.0);
}

TEST_CASE("mixture weights are normalized and the target mean is weighted") {
  MixtureComponent a = comp(2.0, {1.0, 0.0}, 1.0);
  MixtureComponent b = comp(6.0, {0.0, 2.0}, 1.0);
  const MixtureSpec spec({a, b});
  CHECK(spec.components()[0].weight == doctest::Approx(0.25));
  CHECK(spec.components()[1].weight == doctest::Approx(0.75));
  const Eigen::VectorXd mean = spec.mean();
  CHECK(mean[0] == doctest::Approx(0.25));
  CHECK(mean[1] == doctest::Approx(1.5));
}

TEST_CASE("guidance collapses at scale 0 and scale 1") {
  const NoiseSchedule sched = NoiseSchedule::linear(50, 1e-3, 0.05);
  const DiffusionOracle oracle = labeled_oracle(
      sched, {comp(1.0, {1.0, -2.0, 0.5}, 0.3)}, 3);
  const ConditionLabel y = ConditionLabel::label(0);
  const Eigen::VectorXd x = random_vec(3, 42);
  for (int t : {1, 30, 50}) {
    const Eigen::VectorXd e_null = oracle.epsilon(x, t, ConditionLabel::null());
    const Eigen::VectorXd e_y = oracle.epsilon(x, t, y);
    // scale 0: bitwise the unconditional branch.
    CHECK(bitwise_equal(oracle.epsilon_cfg(x, t, y, 0.0), e_null));
    // scale 1: the conditional branch to rounding.
    CHECK(rel_diff(oracle.epsilon_cfg(x, t, y, 1.0), e_y) <= 1e-14);
    // generic scale: exact affine combination.
    const double scale = 4.5;
    const Eigen::VectorXd want = e_null + scale * (e_y - e_null);
    CHECK(rel_diff(oracle.epsilon_cfg(x, t, y, scale), want) <= 1e-14);
  }
}

TEST_CASE("guidance is inert when both branches share the mixture") {
  const NoiseSchedule sched = NoiseSchedule::linear(50, 1e-3, 0.05);
  const std::vector<MixtureComponent> comps = {comp(0.4, {0.7, 0.1}, 0.8),
                                               comp(0.6, {-1.0, 0.4}, 1.2)};
  std::map<ConditionLabel, MixtureSpec> mixtures;
  mixtures.emplace(ConditionLabel::null(), MixtureSpec(comps));
  mixtures.emplace(ConditionLabel::label(0), MixtureSpec(comps));
  const DiffusionOracle oracle(sched, std::move(mixtures));
  const Eigen::VectorXd x = random_vec(2, 7);
  const Eigen::VectorXd base = oracle.epsilon(x, 25, ConditionLabel::null());
  for (double scale : {0.0, 1.0, 7.5, 100.0})
    CHECK(bitwise_equal(
        oracle.epsilon_cfg(x, 25, ConditionLabel::label(0), scale), base));
}

TEST_CASE("oracle call validation") {
  const NoiseSchedule sched = NoiseSchedule::linear(30, 1e-3, 0.05);
  const DiffusionOracle oracle = labeled_oracle(
      sched, {comp(1.0, {0.5, 0.5}, 1.0)}, 2);
  const Eigen::VectorXd x = random_vec(2, 1);
  CHECK_RAISES(Condition, oracle.epsilon(x, 5, ConditionLabel::label(3)));
  CHECK_RAISES(Parameter, oracle.epsilon(random_vec(3, 1), 5,
                                         ConditionLabel::null()));
  CHECK_RAISES(Index, oracle.epsilon(x, -1, ConditionLabel::null()));
  CHECK_RAISES(Index, oracle.epsilon(x, 31, ConditionLabel::null()));
  CHECK_RAISES(Condition, oracle.epsilon_cfg(x, 5, ConditionLabel::null(), 2.0));
  CHECK_RAISES(Parameter, oracle.epsilon_cfg(x, 5, ConditionLabel::label(0),
                                             -0.5));
  CHECK_RAISES(Condition, oracle.mixture(ConditionLabel::label(9)));
}

TEST_CASE("mixture spec validation") {
  CHECK_RAISES(Parameter, MixtureSpec({}));
  CHECK_RAISES(Parameter, MixtureSpec({comp(1.0, {0.0}, 0.0)}));
  CHECK_RAISES(Parameter, MixtureSpec({comp(1.0, {0.0}, -1.0)}));
  CHECK_RAISES(Parameter, MixtureSpec({comp(-1.0, {0.0}, 1.0)}));
  CHECK_RAISES(Parameter,
               MixtureSpec({comp(1.0, {0.0}, 1.0), comp(1.0, {0.0, 1.0}, 1.0)}));
  // Oracle requires the unconditional mixture.
  const NoiseSchedule sched = NoiseSchedule::linear(10, 1e-3, 0.05);
  std::map<ConditionLabel, MixtureSpec> only_label;
  only_label.emplace(ConditionLabel::label(0),
                     MixtureSpec({comp(1.0, {0.0}, 1.0)}));
  CHECK_RAISES(Parameter, DiffusionOracle(sched, std::move(only_label)));
}

TEST_CASE("oracle evaluation is deterministic") {
  const NoiseSchedule sched = NoiseSchedule::linear(64, 1e-3, 0.03);
  const DiffusionOracle oracle = labeled_oracle(
      sched, {comp(0.5, {1.0, 2.0, 3.0}, 0.5), comp(0.5, {-1.0, 0.0, 1.0}, 2.0)},
      3);
  const Eigen::VectorXd x = random_vec(3, 5);
  CHECK(bitwise_equal(oracle.epsilon(x, 33, ConditionLabel::label(0)),
                      oracle.epsilon(x, 33, ConditionLabel::label(0))));
  CHECK(bitwise_equal(oracle.epsilon_cfg(x, 33, ConditionLabel::label(0), 7.5),
                      oracle.epsilon_cfg(x, 33, ConditionLabel::label(0), 7.5)));
}

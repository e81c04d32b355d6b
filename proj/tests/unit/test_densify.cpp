// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "tsmlab/densify.hpp"

using namespace tsmlab;
using namespace tsmlab::testing;

namespace {

Splat make_splat(double px, double py, double sx, double sy, double rot,
                 double opacity, double z) {
  return Splat::from_values({px, py}, {sx, sy}, rot, {0.5, 0.5, 0.5}, opacity,
                            z);
}

DensifyConfig test_config() {
  DensifyConfig c;
  c.tau_pos = 0.1;
  c.sigma_split = 2.0;
  c.tau_opacity = 0.05;
  c.start_iter = 10;
  c.end_iter = 20;
  c.interval = 5;
  c.split_scale_divisor = 1.6;
  c.split_offset = 1.0;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  validate(test_config());  // sane config passes
  DensifyConfig c = test_config();
  c.tau_pos = 0.0;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.sigma_split = -1.0;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.tau_opacity = 1.0;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.end_iter = c.start_iter - 1;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.interval = 0;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.split_scale_divisor = 1.0;
  CHECK_RAISES(Parameter, validate(c));
  c = test_config();
  c.split_offset = -0.1;
  CHECK_RAISES(Parameter, validate(c));
}

TEST_CASE("gradient statistics accumulate and average") {
  DensifyStats stats(3);
  CHECK(stats.size() == 3);
  CHECK(stats.events(0) == 0);
  CHECK(stats.average(0) == 0.0);
  stats.accumulate(0, 1.0);
  stats.accumulate(0, 3.0);
  stats.accumulate(2, 0.5);
  CHECK(stats.events(0) == 2);
  CHECK(stats.average(0) == doctest::Approx(2.0));
  CHECK(stats.events(1) == 0);
  CHECK(stats.average(2) == doctest::Approx(0.5));
  stats.reset();
  CHECK(stats.events(0) == 0);
  CHECK(stats.average(0) == 0.0);

  CHECK_RAISES(Id, stats.accumulate(3, 1.0));
  CHECK_RAISES(Id, stats.events(5));
  CHECK_RAISES(Id, stats.average(4));
  CHECK_RAISES(Parameter, stats.accumulate(0, -1.0));
}

TEST_CASE("control rule fires only on gated iterations") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 1.0, 1.0, 0.0, 0.9, 0.0));
  DensifyStats stats(1);
  stats.accumulate(0, 5.0);  // far above tau_pos

  // Outside the window or off the interval: no actions, stats untouched.
  for (int iter : {0, 9, 11, 12, 14, 21, 100}) {
    CAPTURE(iter);
    CHECK(densify_decide(stats, scene, cfg, iter).empty());
    CHECK(stats.events(0) == 1);
  }
  // On the gate: the clone fires and the stats window resets.
  const std::vector<DensifyAction> actions =
      densify_decide(stats, scene, cfg, 15);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].op == DensifyOp::Clone);
  CHECK(actions[0].splat == 0);
  CHECK(stats.events(0) == 0);

  // A firing pass with nothing to act on still resets the stats.
  stats.accumulate(0, 0.01);  // below tau_pos
  CHECK(densify_decide(stats, scene, cfg, 20).empty());
  CHECK(stats.events(0) == 0);
}

TEST_CASE("prune wins over densification") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 5.0, 1.0, 0.0, 0.01, 0.0));
  DensifyStats stats(1);
  stats.accumulate(0, 100.0);  // would split, but opacity is below threshold
  const std::vector<DensifyAction> actions =
      densify_decide(stats, scene, cfg, 10);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].op == DensifyOp::Prune);
}

TEST_CASE("split or clone depends on the major scale") {
  const DensifyConfig cfg = test_config();  // sigma_split = 2
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 0.5, 1.9, 0.0, 0.9, 0.0));  // clone
  scene.splats.push_back(make_splat(0, 0, 2.5, 0.5, 0.0, 0.9, 1.0));  // split
  scene.splats.push_back(make_splat(0, 0, 0.5, 2.5, 0.0, 0.9, 2.0));  // split
  scene.splats.push_back(make_splat(0, 0, 9.0, 9.0, 0.0, 0.9, 3.0));  // quiet
  DensifyStats stats(4);
  stats.accumulate(0, 1.0);
  stats.accumulate(1, 1.0);
  stats.accumulate(2, 1.0);
  // Splat 3 records no events and must not act.
  const std::vector<DensifyAction> actions =
      densify_decide(stats, scene, cfg, 10);
  REQUIRE(actions.size() == 3);
  CHECK(actions[0].op == DensifyOp::Clone);
  CHECK(actions[1].op == DensifyOp::Split);
  CHECK(actions[2].op == DensifyOp::Split);
}

TEST_CASE("the positional threshold is strict") {
  const DensifyConfig cfg = test_config();  // tau_pos = 0.1
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 1.0, 1.0, 0.0, 0.9, 0.0));
  DensifyStats stats(1);
  stats.accumulate(0, cfg.tau_pos);  // average == tau_pos: no action
  CHECK(densify_decide(stats, scene, cfg, 10).empty());
}

TEST_CASE("decide refuses mismatched bookkeeping") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 1.0, 1.0, 0.0, 0.9, 0.0));
  DensifyStats stats(2);
  CHECK_RAISES(Id, densify_decide(stats, scene, cfg, 10));
}

TEST_CASE("apply performs clone, split and prune in one pass") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0.0, 0.0, 1.0, 1.0, 0.0, 0.9, 0.0));
  scene.splats.push_back(make_splat(1.0, 2.0, 1.5, 0.5, 0.3, 0.8, 1.0));
  scene.splats.push_back(make_splat(4.0, 4.0, 3.0, 1.0, 0.0, 0.7, 2.0));
  scene.splats.push_back(make_splat(9.0, 9.0, 1.0, 1.0, 0.0, 0.02, 3.0));

  const std::vector<DensifyAction> actions = {{DensifyOp::Clone, 1},
                                              {DensifyOp::Split, 2},
                                              {DensifyOp::Prune, 3}};
  const DensifyCounts counts = densify_apply(scene, actions, cfg);
  CHECK(counts.clones == 1);
  CHECK(counts.splits == 1);
  CHECK(counts.prunes == 1);
  REQUIRE(scene.size() == 5);  // 4 + 1 (clone) + 1 (split net) - 1 (prune)

  // Untouched head, then the duplicated pair.
  CHECK(scene.splats[0].pos[0] == 0.0);
  CHECK(scene.splats[0].pos[1] == 0.0);
  CHECK(scene.splats[1].pos[0] == 1.0);
  CHECK(scene.splats[1].pos[1] == 2.0);
  CHECK(bitwise_equal(scene.splats[2].pos, scene.splats[1].pos));
  CHECK(bitwise_equal(scene.splats[2].log_scale, scene.splats[1].log_scale));
  CHECK(scene.splats[2].opacity_logit == scene.splats[1].opacity_logit);

  // Split children: scales divided, offsets +/- sigma along the major axis
  // (rot = 0, sx > sy, so the major axis is +x and sigma = 3).
  const Splat& a = scene.splats[3];
  const Splat& b = scene.splats[4];
  CHECK(a.pos[0] == doctest::Approx(4.0 + 3.0).epsilon(1e-14));
  CHECK(b.pos[0] == doctest::Approx(4.0 - 3.0).epsilon(1e-14));
  CHECK(a.pos[1] == doctest::Approx(4.0));
  CHECK(a.scale()[0] == doctest::Approx(3.0 / 1.6).epsilon(1e-13));
  CHECK(a.scale()[1] == doctest::Approx(1.0 / 1.6).epsilon(1e-13));
  CHECK(b.scale()[0] == doctest::Approx(3.0 / 1.6).epsilon(1e-13));
  CHECK(a.z == 2.0);
  CHECK(b.z == 2.0);
}

TEST_CASE("split respects the rotated major axis") {
  DensifyConfig cfg = test_config();
  cfg.split_offset = 2.0;
  const double rot = 0.7;
  SplatScene scene;
  // sy > sx: the major axis is the rotated +y direction (-sin, cos).
  scene.splats.push_back(make_splat(1.0, 1.0, 0.5, 4.0, rot, 0.9, 0.0));
  densify_apply(scene, {{DensifyOp::Split, 0}}, cfg);
  REQUIRE(scene.size() == 2);
  const Eigen::Vector2d major(-std::sin(rot), std::cos(rot));
  const Eigen::Vector2d want_a =
      Eigen::Vector2d(1.0, 1.0) + 2.0 * 4.0 * major;
  const Eigen::Vector2d want_b =
      Eigen::Vector2d(1.0, 1.0) - 2.0 * 4.0 * major;
  CHECK(rel_diff(scene.splats[0].pos, want_a) <= 1e-13);
  CHECK(rel_diff(scene.splats[1].pos, want_b) <= 1e-13);
}

TEST_CASE("apply validates ids and rejects conflicting actions") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 1.0, 1.0, 0.0, 0.9, 0.0));
  CHECK_RAISES(Id, densify_apply(scene, {{DensifyOp::Clone, 1}}, cfg));
  CHECK_RAISES(Id, densify_apply(
                       scene,
                       {{DensifyOp::Clone, 0}, {DensifyOp::Prune, 0}}, cfg));
  // The failed calls must not have mutated the scene.
  CHECK(scene.size() == 1);
}

TEST_CASE("empty action list is a no-op") {
  const DensifyConfig cfg = test_config();
  SplatScene scene;
  scene.splats.push_back(make_splat(0, 0, 1.0, 1.0, 0.0, 0.9, 0.0));
  const SplatScene before = scene;
  const DensifyCounts counts = densify_apply(scene, {}, cfg);
  CHECK(counts.clones == 0);
  CHECK(counts.splits == 0);
  CHECK(counts.prunes == 0);
  REQUIRE(scene.size() == before.size());
  CHECK(bitwise_equal(scene.splats[0].pos, before.splats[0].pos));
}

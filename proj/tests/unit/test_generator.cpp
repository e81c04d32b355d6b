// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "tsmlab/generator.hpp"

using namespace tsmlab;
using namespace tsmlab::testing;

namespace {

// Deterministic random scene with interior positions and well-separated
// depth values (so finite differences never cross a z-reordering).
SplatScene random_scene(std::uint64_t seed, int count, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upos(lo, hi);
  std::uniform_real_distribution<double> uscale(std::log(0.6), std::log(1.8));
  std::uniform_real_distribution<double> urot(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> ucol(0.0, 1.0);
  std::uniform_real_distribution<double> ulogit(-1.5, 2.0);
  std::uniform_real_distribution<double> uz(0.0, 0.5);
  SplatScene scene;
  for (int i = 0; i < count; ++i) {
    Splat s;
    s.pos = {upos(rng), upos(rng)};
    s.log_scale = {uscale(rng), uscale(rng)};
    s.rot = urot(rng);
    s.color = {ucol(rng), ucol(rng), ucol(rng)};
    s.opacity_logit = ulogit(rng);
    s.z = static_cast<double>(i) + uz(rng);
    scene.splats.push_back(s);
  }
  return scene;
}

RenderGrad random_grad(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RenderGrad g;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  g.color.resize(n * 3);
  g.depth.resize(n);
  g.alpha.resize(n);
  for (auto& v : g.color) v = u(rng);
  for (auto& v : g.depth) v = u(rng);
  for (auto& v : g.alpha) v = u(rng);
  return g;
}

double weighted_loss(const SplatScene& scene, const ViewParam& view, int width,
                     int height, const RenderGrad& w) {
  const RenderOutput out = render(scene, view, width, height);
  double loss = 0.0;
  for (std::size_t i = 0; i < out.color.size(); ++i)
    if (!w.color.empty()) loss += w.color[i] * out.color[i];
  for (std::size_t i = 0; i < out.depth.size(); ++i) {
    if (!w.depth.empty()) loss += w.depth[i] * out.depth[i];
    if (!w.alpha.empty()) loss += w.alpha[i] * out.alpha[i];
  }
  return loss;
}

// Central finite difference through one scalar splat parameter.
double fd_param(SplatScene& scene, const ViewParam& view, int width,
                int height, const RenderGrad& w, std::size_t splat,
                double* param) {
  const double h = 1e-5;
  const double saved = *param;
  *param = saved + h;
  const double up = weighted_loss(scene, view, width, height, w);
  *param = saved - h;
  const double down = weighted_loss(scene, view, width, height, w);
  *param = saved;
  (void)splat;
  return (up - down) / (2.0 * h);
}

void check_fd(const SplatScene& base, const ViewParam& view, int width,
              int height, const RenderGrad& w) {
  const std::vector<SplatGrad> an =
      render_backward(base, view, width, height, w);
  SplatScene scene = base;  // mutable copy for the probes
  const auto close = [](double a, double f) {
    return std::abs(a - f) <= 1e-5 * std::max(std::abs(a), std::abs(f)) + 1e-7;
  };
  for (std::size_t k = 0; k < scene.splats.size(); ++k) {
    Splat& s = scene.splats[k];
    const struct {
      const char* name;
      double* param;
      double analytic;
    } probes[] = {
        {"pos_x", &s.pos[0], an[k].pos[0]},
        {"pos_y", &s.pos[1], an[k].pos[1]},
        {"log_scale_x", &s.log_scale[0], an[k].log_scale[0]},
        {"log_scale_y", &s.log_scale[1], an[k].log_scale[1]},
        {"rot", &s.rot, an[k].rot},
        {"color_r", &s.color[0], an[k].color[0]},
        {"color_g", &s.color[1], an[k].color[1]},
        {"color_b", &s.color[2], an[k].color[2]},
        {"opacity_logit", &s.opacity_logit, an[k].opacity_logit},
        {"z", &s.z, an[k].z},
    };
    for (const auto& probe : probes) {
      const double fd =
          fd_param(scene, view, width, height, w, k, probe.param);
      CAPTURE(k);
      CAPTURE(probe.name);
      CAPTURE(probe.analytic);
      CAPTURE(fd);
      CHECK(close(probe.analytic, fd));
    }
  }
}

}  // namespace

TEST_CASE("single centered splat composites its own color") {
  SplatScene scene;
  scene.splats.push_back(Splat::from_values({4.5, 4.5}, {50.0, 50.0}, 0.0,
                                            {1.0, 0.25, 0.0}, 0.99, 1.0));
  const RenderOutput out = render(scene, ViewParam{}, 9, 9);
  const std::size_t pix = 4 * 9 + 4;  // pixel center exactly at the splat
  CHECK(out.alpha[pix] == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(out.color[pix * 3 + 0] == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(out.color[pix * 3 + 1] == doctest::Approx(0.2475).epsilon(1e-12));
  CHECK(out.color[pix * 3 + 2] == 0.0);
  CHECK(out.depth[pix] == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(out.scale_hint[pix] == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("distant splat leaves the frame empty") {
  SplatScene scene;
  scene.splats.push_back(Splat::from_values({1e6, 1e6}, {1.0, 1.0}, 0.3,
                                            {1.0, 1.0, 1.0}, 0.9, 2.0));
  const RenderOutput out = render(scene, ViewParam{}, 4, 4);
  for (double v : out.color) CHECK(v == 0.0);
  for (double v : out.depth) CHECK(v == 0.0);
  for (double v : out.alpha) CHECK(v == 0.0);
  for (double v : out.scale_hint) CHECK(v == 0.0);
}

TEST_CASE("two stacked splats follow front-to-back compositing by depth") {
  // Listed back-to-front on purpose; the renderer must sort by z.
  SplatScene scene;
  scene.splats.push_back(Splat::from_values({0.5, 0.5}, {1.0, 3.0}, 0.0,
                                            {0.0, 1.0, 0.0}, 0.5, 2.0));
  scene.splats.push_back(Splat::from_values({0.5, 0.5}, {2.0, 1.0}, 0.0,
                                            {1.0, 0.0, 0.0}, 0.6, 1.0));
  const RenderOutput out = render(scene, ViewParam{}, 1, 1);
  // w_front = 0.6, w_back = 0.5 * (1 - 0.6) = 0.2.
  CHECK(out.color[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(out.color[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(out.color[2] == 0.0);
  CHECK(out.depth[0] == doctest::Approx(0.6 * 1.0 + 0.2 * 2.0).epsilon(1e-12));
  CHECK(out.alpha[0] == doctest::Approx(0.8).epsilon(1e-12));
  // Coverage-weighted mean of the larger scale: (0.6*2 + 0.2*3) / 0.8.
  CHECK(out.scale_hint[0] == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("coverage stays inside [0, 1) and depth under the far plane") {
  const SplatScene scene = random_scene(2024, 30, 2.0, 14.0);
  const RenderOutput out = render(scene, ViewParam{}, 16, 16);
  double zmax = 0.0;
  for (const auto& s : scene.splats) zmax = std::max(zmax, s.z);
  for (std::size_t i = 0; i < out.alpha.size(); ++i) {
    REQUIRE(out.alpha[i] >= 0.0);
    REQUIRE(out.alpha[i] < 1.0);
    REQUIRE(out.depth[i] >= 0.0);
    REQUIRE(out.depth[i] <= zmax * out.alpha[i] + 1e-12);
  }
}

TEST_CASE("rendering is deterministic") {
  const SplatScene scene = random_scene(7, 12, 1.0, 11.0);
  const RenderOutput a = render(scene, ViewParam{}, 12, 12);
  const RenderOutput b = render(scene, ViewParam{}, 12, 12);
  CHECK(a.color == b.color);
  CHECK(a.depth == b.depth);
  CHECK(a.alpha == b.alpha);
  CHECK(a.scale_hint == b.scale_hint);
}

TEST_CASE("analytic gradients match finite differences") {
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    CAPTURE(trial);
    const SplatScene scene = random_scene(100 + trial, 6, 4.0, 12.0);
    const RenderGrad w = random_grad(200 + trial, 16, 16);
    check_fd(scene, ViewParam{}, 16, 16, w);
  }
}

TEST_CASE("analytic gradients match finite differences under an affine view") {
  ViewParam view;
  view.linear << 1.1, 0.2, -0.15, 0.95;
  view.offset << 0.8, -0.4;
  for (std::uint64_t trial = 0; trial < 2; ++trial) {
    CAPTURE(trial);
    const SplatScene scene = random_scene(300 + trial, 5, 4.0, 11.0);
    const RenderGrad w = random_grad(400 + trial, 16, 16);
    check_fd(scene, view, 16, 16, w);
  }
}

TEST_CASE("color-only upstream gradients leave shape channels consistent") {
  const SplatScene scene = random_scene(55, 5, 4.0, 12.0);
  RenderGrad w = random_grad(56, 16, 16);
  w.depth.clear();  // empty means zero upstream for that channel
  w.alpha.clear();
  check_fd(scene, ViewParam{}, 16, 16, w);
  // z only ever enters through depth, so its gradient must vanish.
  const std::vector<SplatGrad> an =
      render_backward(scene, ViewParam{}, 16, 16, w);
  for (const auto& g : an) CHECK(g.z == 0.0);
}

TEST_CASE("zero upstream gradient maps to zero parameter gradients") {
  const SplatScene scene = random_scene(66, 4, 2.0, 8.0);
  const std::vector<SplatGrad> gs =
      render_backward(scene, ViewParam{}, 10, 10, RenderGrad{});
  for (const auto& g : gs) {
    CHECK(g.pos.norm() == 0.0);
    CHECK(g.log_scale.norm() == 0.0);
    CHECK(g.rot == 0.0);
    CHECK(g.color.norm() == 0.0);
    CHECK(g.opacity_logit == 0.0);
    CHECK(g.z == 0.0);
    CHECK(g.view_pos_norm == 0.0);
  }
}

TEST_CASE("gradients are equivariant under integer translations") {
  const int size = 48, dx = 4, dy = 3;
  const SplatScene base = random_scene(77, 5, 20.0, 26.0);
  SplatScene moved = base;
  for (auto& s : moved.splats) s.pos += Eigen::Vector2d(dx, dy);

  // Weights supported on [8, 40) so both footprints stay interior.
  RenderGrad wb, wm;
  const std::size_t n = static_cast<std::size_t>(size) * size;
  wb.color.assign(n * 3, 0.0);
  wm.color.assign(n * 3, 0.0);
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int y = 8; y < 40; ++y) {
    for (int x = 8; x < 40; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = u(rng);
        wb.color[(static_cast<std::size_t>(y) * size + x) * 3 + c] = v;
        wm.color[(static_cast<std::size_t>(y + dy) * size + x + dx) * 3 + c] =
            v;
      }
    }
  }
  const std::vector<SplatGrad> gb =
      render_backward(base, ViewParam{}, size, size, wb);
  const std::vector<SplatGrad> gm =
      render_backward(moved, ViewParam{}, size, size, wm);
  for (std::size_t k = 0; k < gb.size(); ++k) {
    CAPTURE(k);
    CHECK(rel_diff(gb[k].pos, gm[k].pos) <= 1e-9);
    CHECK(rel_diff(gb[k].log_scale, gm[k].log_scale) <= 1e-9);
    CHECK(gb[k].rot == doctest::Approx(gm[k].rot).epsilon(1e-9));
    CHECK(rel_diff(gb[k].color, gm[k].color) <= 1e-9);
    CHECK(gb[k].opacity_logit ==
          doctest::Approx(gm[k].opacity_logit).epsilon(1e-9));
  }
}

TEST_CASE("scene round trips through its text form") {
  const SplatScene scene = random_scene(88, 9, 1.0, 15.0);
  const TempDir dir("scene");
  const auto path = dir.path() / "scene.txt";
  scene.save(path);
  const SplatScene back = SplatScene::load(path);
  REQUIRE(back.size() == scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    CHECK(rel_diff(back.splats[i].pos, scene.splats[i].pos) <= 1e-12);
    CHECK(rel_diff(back.splats[i].log_scale, scene.splats[i].log_scale) <=
          1e-12);
    CHECK(back.splats[i].rot ==
          doctest::Approx(scene.splats[i].rot).epsilon(1e-12));
    CHECK(rel_diff(back.splats[i].color, scene.splats[i].color) <= 1e-12);
    CHECK(back.splats[i].opacity() ==
          doctest::Approx(scene.splats[i].opacity()).epsilon(1e-12));
    CHECK(back.splats[i].z == scene.splats[i].z);
  }
  CHECK_RAISES(Io, SplatScene::load(dir.path() / "missing.txt"));
}

TEST_CASE("render and backward validate their inputs") {
  const SplatScene scene = random_scene(99, 3, 1.0, 7.0);
  CHECK_RAISES(Parameter, render(SplatScene{}, ViewParam{}, 8, 8));
  CHECK_RAISES(Parameter, render(scene, ViewParam{}, 0, 8));
  CHECK_RAISES(Parameter, render(scene, ViewParam{}, 8, -1));
  ViewParam squash;
  squash.linear << 1.0, 2.0, 0.5, 1.0;  // determinant zero
  CHECK_RAISES(View, render(scene, squash, 8, 8));
  RenderGrad bad;
  bad.color.assign(7, 0.0);
  CHECK_RAISES(Parameter, render_backward(scene, ViewParam{}, 8, 8, bad));
  RenderGrad bad2;
  bad2.depth.assign(5, 0.0);
  CHECK_RAISES(Parameter, render_backward(scene, ViewParam{}, 8, 8, bad2));
}

TEST_CASE("splat construction validates its domain") {
  CHECK_RAISES(Parameter, Splat::from_values({0, 0}, {0.0, 1.0}, 0.0,
                                             {1, 1, 1}, 0.5, 0.0));
  CHECK_RAISES(Parameter, Splat::from_values({0, 0}, {1.0, -1.0}, 0.0,
                                             {1, 1, 1}, 0.5, 0.0));
  CHECK_RAISES(Parameter, Splat::from_values({0, 0}, {1.0, 1.0}, 0.0,
                                             {1, 1, 1}, 0.0, 0.0));
  CHECK_RAISES(Parameter, Splat::from_values({0, 0}, {1.0, 1.0}, 0.0,
                                             {1, 1, 1}, 1.0, 0.0));
  const double nan = std::nan("");
  CHECK_RAISES(Parameter, Splat::from_values({0, 0}, {1.0, 1.0}, 0.0,
                                             {nan, 0, 0}, 0.5, 0.0));
  // Round trip through the constrained form.
  const Splat s = Splat::from_values({1.5, -2.0}, {0.8, 2.5}, 0.7,
                                     {0.1, 0.2, 0.3}, 0.75, 4.0);
  CHECK(s.scale()[0] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(s.scale()[1] == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(s.opacity() == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("identity generator passes parameters through as a clean latent") {
  const Eigen::VectorXd theta = random_vec(12, 5);
  const Latent x = identity_generator(theta);
  CHECK(x.t == 0);
  CHECK(bitwise_equal(x.values, theta));
  CHECK_RAISES(Parameter, identity_generator(Eigen::VectorXd()));
}

// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <vector>

#include "tsmlab/ddim.hpp"
#include "tsmlab/error.hpp"

namespace tsmlab {

// Footprint cutoff on the squared Mahalanobis distance. Pixels beyond it
// skip the splat; exp(-30) is far below every gradient-check tolerance.
inline constexpr double kFootprintCut = 60.0;

// Anisotropic 2D Gaussian primitive. Scales are stored in log space and
// opacity as a logit so gradient steps cannot leave the valid domain.
struct Splat {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d log_scale = Eigen::Vector2d::Zero();
  double rot = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
  double opacity_logit = 0.0;
  double z = 0.0;

  Eigen::Vector2d scale() const { return log_scale.array().exp(); }
  double opacity() const { return 1.0 / (1.0 + std::exp(-opacity_logit)); }

  // Build from constrained values (scale > 0, opacity in (0, 1)).
  static Splat from_values(const Eigen::Vector2d& pos,
                           const Eigen::Vector2d& scale, double rot,
                           const Eigen::Vector3d& color, double opacity,
                           double z);
};

struct SplatScene {
  std::vector<Splat> splats;

  std::size_t size() const { return splats.size(); }
  void save(const std::filesystem::path& path) const;
  static SplatScene load(const std::filesystem::path& path);
};

// Affine map from world coordinates into pixel coordinates.
struct ViewParam {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
};

// Flat row-major buffers; color is interleaved RGB.
struct RenderOutput {
  int width = 0;
  int height = 0;
  std::vector<double> color;       // h*w*3
  std::vector<double> depth;       // h*w, alpha-weighted z, background 0
  std::vector<double> alpha;       // h*w, total coverage in [0, 1)
  std::vector<double> scale_hint;  // h*w, coverage-weighted mean major scale
};

// Front-to-back alpha compositing over splats sorted by ascending z.
// alpha_k = opacity_k * exp(-q_k / 2) with q the squared Mahalanobis
// distance of the pixel center in the splat frame.
RenderOutput render(const SplatScene& scene, const ViewParam& view, int width,
                    int height);

// Upstream gradients; an empty vector means zeros for that channel.
struct RenderGrad {
  std::vector<double> color;  // h*w*3
  std::vector<double> depth;  // h*w
  std::vector<double> alpha;  // h*w
};

struct SplatGrad {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d log_scale = Eigen::Vector2d::Zero();
  double rot = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double opacity_logit = 0.0;
  double z = 0.0;
  // Norm of the view-space positional gradient; feeds densification.
  double view_pos_norm = 0.0;
};

// Analytic adjoint of render for every splat parameter.
std::vector<SplatGrad> render_backward(const SplatScene& scene,
                                       const ViewParam& view, int width,
                                       int height, const RenderGrad& grad);

// Pass-through generator: the parameter vector is the latent.
Latent identity_generator(const Eigen::VectorXd& theta);

}  // namespace tsmlab

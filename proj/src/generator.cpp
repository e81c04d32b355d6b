// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tsmlab {

namespace {

struct PreparedSplat {
  Eigen::Vector2d view_pos;
  double cos_r, sin_r;
  double sx, sy;
  double opacity;
  double max_scale;
};

struct Prepared {
  std::vector<PreparedSplat> splats;
  std::vector<std::size_t> order;  // ascending z, stable
};

Prepared prepare(const SplatScene& scene, const ViewParam& view, int width,
                 int height) {
  require(width >= 1 && height >= 1, ErrorCode::Parameter,
          "render: width and height must be >= 1");
  require(!scene.splats.empty(), ErrorCode::Parameter,
          "render: scene has no splats");
  require(std::abs(view.linear.determinant()) > 1e-9, ErrorCode::View,
          "render: view transform is degenerate");

  Prepared p;
  p.splats.reserve(scene.splats.size());
  for (const auto& s : scene.splats) {
    PreparedSplat ps;
    ps.view_pos = view.linear * s.pos + view.offset;
    ps.cos_r = std::cos(s.rot);
    ps.sin_r = std::sin(s.rot);
    Eigen::Vector2d sc = s.scale();
    ps.sx = sc[0];
    ps.sy = sc[1];
    ps.opacity = s.opacity();
    ps.max_scale = std::max(sc[0], sc[1]);
    p.splats.push_back(ps);
  }
  p.order.resize(scene.splats.size());
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  std::stable_sort(p.order.begin(), p.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scene.splats[a].z < scene.splats[b].z;
                   });
  return p;
}

// One splat's footprint response at a pixel center.
struct Hit {
  std::size_t splat;  // scene index
  double e1, e2;      // offsets in the splat frame
  double gauss;       // exp(-q/2)
  double alpha;       // opacity * gauss
  double trans;       // transmittance before this splat
};

template <typename Fn>
void composite_pixel(const Prepared& p, double px, double py, Fn&& on_hit) {
  double trans = 1.0;
  for (std::size_t idx : p.order) {
    const PreparedSplat& ps = p.splats[idx];
    double dx = px - ps.view_pos[0];
    double dy = py - ps.view_pos[1];
    double e1 = ps.cos_r * dx + ps.sin_r * dy;
    double e2 = -ps.sin_r * dx + ps.cos_r * dy;
    double u = e1 / ps.sx;
    double v = e2 / ps.sy;
    double q = u * u + v * v;
    if (q > kFootprintCut) continue;
    double gauss = std::exp(-0.5 * q);
    double alpha = ps.opacity * gauss;
    on_hit(Hit{idx, e1, e2, gauss, alpha, trans});
    trans *= 1.0 - alpha;
  }
}

void check_grad_size(const std::vector<double>& g, std::size_t want,
                     const char* what) {
  require(g.empty() || g.size() == want, ErrorCode::Parameter,
          std::string("render_backward: bad ") + what + " gradient size");
}

}  // namespace

Splat Splat::from_values(const Eigen::Vector2d& pos,
                         const Eigen::Vector2d& scale, double rot,
                         const Eigen::Vector3d& color, double opacity,
                         double z) {
  require(scale[0] > 0.0 && scale[1] > 0.0, ErrorCode::Parameter,
          "splat scale must be positive");
  require(opacity > 0.0 && opacity < 1.0, ErrorCode::Parameter,
          "splat opacity must lie in (0, 1)");
  for (int i = 0; i < 3; ++i) {
    require(std::isfinite(color[i]), ErrorCode::Parameter,
            "splat color must be finite");
  }
  Splat s;
  s.pos = pos;
  s.log_scale = scale.array().log();
  s.rot = rot;
  s.color = color;
  s.opacity_logit = std::log(opacity / (1.0 - opacity));
  s.z = z;
  return s;
}

RenderOutput render(const SplatScene& scene, const ViewParam& view, int width,
                    int height) {
  Prepared p = prepare(scene, view, width, height);

  RenderOutput out;
  out.width = width;
  out.height = height;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  out.color.assign(n * 3, 0.0);
  out.depth.assign(n, 0.0);
  out.alpha.assign(n, 0.0);
  out.scale_hint.assign(n, 0.0);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::size_t pix = static_cast<std::size_t>(y) * width + x;
      double c0 = 0, c1 = 0, c2 = 0, depth = 0, cover = 0, scale_sum = 0;
      composite_pixel(p, x + 0.5, y + 0.5, [&](const Hit& h) {
        const Splat& s = scene.splats[h.splat];
        double w = h.alpha * h.trans;
        c0 += w * s.color[0];
        c1 += w * s.color[1];
        c2 += w * s.color[2];
        depth += w * s.z;
        cover += w;
        scale_sum += w * p.splats[h.splat].max_scale;
      });
      out.color[pix * 3 + 0] = c0;
      out.color[pix * 3 + 1] = c1;
      out.color[pix * 3 + 2] = c2;
      out.depth[pix] = depth;
      out.alpha[pix] = cover;
      out.scale_hint[pix] = cover > 0.0 ? scale_sum / cover : 0.0;
    }
  }
  return out;
}

std::vector<SplatGrad> render_backward(const SplatScene& scene,
                                       const ViewParam& view, int width,
                                       int height, const RenderGrad& grad) {
  Prepared p = prepare(scene, view, width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  check_grad_size(grad.color, n * 3, "color");
  check_grad_size(grad.depth, n, "depth");
  check_grad_size(grad.alpha, n, "alpha");

  std::vector<SplatGrad> out(scene.splats.size());
  std::vector<Eigen::Vector2d> view_pos_grad(scene.splats.size(),
                                             Eigen::Vector2d::Zero());
  std::vector<Hit> hits;
  hits.reserve(scene.splats.size());

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::size_t pix = static_cast<std::size_t>(y) * width + x;
      Eigen::Vector3d g_color = Eigen::Vector3d::Zero();
      if (!grad.color.empty()) {
        g_color << grad.color[pix * 3 + 0], grad.color[pix * 3 + 1],
            grad.color[pix * 3 + 2];
      }
      double g_depth = grad.depth.empty() ? 0.0 : grad.depth[pix];
      double g_alpha = grad.alpha.empty() ? 0.0 : grad.alpha[pix];
      if (g_color.isZero(0.0) && g_depth == 0.0 && g_alpha == 0.0) continue;

      hits.clear();
      composite_pixel(p, x + 0.5, y + 0.5,
                      [&](const Hit& h) { hits.push_back(h); });

      // Back-to-front: rear = sum over later splats of contrib * weight,
      // which is exactly what a change in this splat's alpha attenuates.
      double rear = 0.0;
      for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
        const Hit& h = *it;
        const Splat& s = scene.splats[h.splat];
        const PreparedSplat& ps = p.splats[h.splat];
        double contrib = g_color.dot(s.color) + g_depth * s.z + g_alpha;
        double dL_da = h.trans * contrib - rear / (1.0 - h.alpha);
        rear += contrib * h.alpha * h.trans;

        SplatGrad& sg = out[h.splat];
        double w = h.alpha * h.trans;
        sg.color += w * g_color;
        sg.z += w * g_depth;
        sg.opacity_logit +=
            dL_da * h.gauss * ps.opacity * (1.0 - ps.opacity);

        double dL_dq = dL_da * (-0.5) * h.alpha;
        double g1 = dL_dq * 2.0 * h.e1 / (ps.sx * ps.sx);
        double g2 = dL_dq * 2.0 * h.e2 / (ps.sy * ps.sy);
        // e = R^T d with d = pixel - view_pos, so dL/d view_pos = -R (g1, g2).
        view_pos_grad[h.splat][0] -= ps.cos_r * g1 - ps.sin_r * g2;
        view_pos_grad[h.splat][1] -= ps.sin_r * g1 + ps.cos_r * g2;
        sg.rot += g1 * h.e2 - g2 * h.e1;
        sg.log_scale[0] += dL_dq * (-2.0) * h.e1 * h.e1 / (ps.sx * ps.sx);
        sg.log_scale[1] += dL_dq * (-2.0) * h.e2 * h.e2 / (ps.sy * ps.sy);
      }
    }
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].pos = view.linear.transpose() * view_pos_grad[i];
    out[i].view_pos_norm = view_pos_grad[i].norm();
  }
  return out;
}

Latent identity_generator(const Eigen::VectorXd& theta) {
  require(theta.size() >= 1, ErrorCode::Parameter,
          "identity generator needs a non-empty parameter vector");
  return {theta, 0};
}

void SplatScene::save(const std::filesystem::path& path) const {
  std::ofstream f(path);
  require(f.good(), ErrorCode::Io, "cannot open " + path.string());
  f << "# px py sx sy rot r g b opacity z\n";
  char buf[512];
  for (const auto& s : splats) {
    Eigen::Vector2d sc = s.scale();
    std::snprintf(buf, sizeof(buf),
                  "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                  "%.17g\n",
                  s.pos[0], s.pos[1], sc[0], sc[1], s.rot, s.color[0],
                  s.color[1], s.color[2], s.opacity(), s.z);
    f << buf;
  }
  require(f.good(), ErrorCode::Io, "failed writing " + path.string());
}

SplatScene SplatScene::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::Io, "cannot open " + path.string());
  SplatScene scene;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream in(line);
    double px, py, sx, sy, rot, r, g, b, opacity, z;
    if (!(in >> px >> py >> sx >> sy >> rot >> r >> g >> b >> opacity >> z)) {
      raise(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                               ": expected 10 numbers");
    }
    scene.splats.push_back(Splat::from_values(
        {px, py}, {sx, sy}, rot, {r, g, b}, opacity, z));
  }
  return scene;
}

}  // namespace tsmlab

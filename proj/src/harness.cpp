// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "tsmlab/clipping.hpp"
#include "tsmlab/image_io.hpp"

namespace tsmlab {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string gshort(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Seed streams used by the run loop.
constexpr std::uint64_t kStreamEstimator = 1;
constexpr std::uint64_t kStreamDepthNoise = 2;
constexpr std::uint64_t kStreamViewJitter = 3;
constexpr std::uint64_t kStreamData = 4;

struct OracleBundle {
  NoiseSchedule schedule;
  DiffusionOracle oracle;
  ConditionLabel y;
  Eigen::VectorXd target;  // condition mixture mean
};

OracleBundle build_oracle(const RunConfig& cfg) {
  NoiseSchedule schedule =
      NoiseSchedule::linear(cfg.steps, cfg.beta_start, cfg.beta_end);
  LatentLayout layout = cfg.layout();
  std::map<ConditionLabel, MixtureSpec> mixtures;
  for (const auto& [label, comps] : cfg.mixtures) {
    std::vector<MixtureComponent> mcs;
    mcs.reserve(comps.size());
    for (const auto& comp : comps) {
      mcs.push_back(
          {comp.weight, resolve_mean(comp.mean, layout), comp.variance});
    }
    ConditionLabel key = label < 0 ? ConditionLabel::null()
                                   : ConditionLabel::label(label);
    mixtures.emplace(key, MixtureSpec(std::move(mcs)));
  }
  DiffusionOracle oracle(schedule, std::move(mixtures));
  ConditionLabel y = cfg.condition < 0 ? ConditionLabel::null()
                                       : ConditionLabel::label(cfg.condition);
  Eigen::VectorXd target = oracle.mixture(y).mean();
  return {std::move(schedule), std::move(oracle), y, std::move(target)};
}

Eigen::VectorXd init_theta(const RunConfig& cfg) {
  LatentLayout layout = cfg.layout();
  const int dim = layout.dim();
  const std::string& spec = cfg.identity_init;
  auto colon = spec.find(':');
  require(colon != std::string::npos, ErrorCode::Config,
          "generator.init needs a 'kind:payload' form");
  std::string kind = spec.substr(0, colon);
  std::string payload = spec.substr(colon + 1);
  if (kind == "fill") {
    double v = 0.0;
    try {
      v = std::stod(payload);
    } catch (const std::exception&) {
      raise(ErrorCode::Config, "generator.init: bad fill value");
    }
    return Eigen::VectorXd::Constant(dim, v);
  }
  if (kind == "randn") {
    double sigma = 0.0;
    try {
      sigma = std::stod(payload);
    } catch (const std::exception&) {
      raise(ErrorCode::Config, "generator.init: bad randn sigma");
    }
    require(sigma >= 0.0, ErrorCode::Config,
            "generator.init: sigma must be >= 0");
    std::mt19937_64 rng(cfg.init_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd theta(dim);
    for (int i = 0; i < dim; ++i) theta[i] = 0.5 + sigma * normal(rng);
    return theta;
  }
  if (kind == "image") {
    require(layout.channels == 3, ErrorCode::Config,
            "generator.init image needs 3 channels");
    ImageRgb img = read_png_rgb(payload);
    require(img.width == layout.width && img.height == layout.height,
            ErrorCode::Config, "generator.init image size mismatch");
    return Eigen::Map<const Eigen::VectorXd>(img.rgb.data(),
                                             static_cast<long>(img.rgb.size()));
  }
  raise(ErrorCode::Config, "generator.init: unknown kind '" + kind + "'");
}

SplatScene init_scene(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.init_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double margin = 1.5;
  SplatScene scene;
  scene.splats.reserve(static_cast<std::size_t>(cfg.splat_count));
  for (int i = 0; i < cfg.splat_count; ++i) {
    double px = margin + (cfg.width - 2 * margin) * uni(rng);
    double py = margin + (cfg.height - 2 * margin) * uni(rng);
    double rot = 2.0 * M_PI * uni(rng);
    Eigen::Vector3d color(0.5, 0.5, 0.5);
    if (cfg.splat_color == "random") {
      color = {0.25 + 0.5 * uni(rng), 0.25 + 0.5 * uni(rng),
               0.25 + 0.5 * uni(rng)};
    }
    double z = cfg.splat_z == "random" ? uni(rng)
                                       : (i + 0.5) / cfg.splat_count;
    scene.splats.push_back(Splat::from_values(
        {px, py}, {cfg.splat_scale, cfg.splat_scale}, rot, color,
        cfg.splat_opacity, z));
  }
  return scene;
}

ViewParam make_view(const RunConfig& cfg, int iter, int view_index) {
  ViewParam view;
  if (cfg.view_jitter > 0.0) {
    std::mt19937_64 rng(derive_seed(
        cfg.seed, kStreamViewJitter,
        static_cast<std::uint64_t>(iter) * cfg.view_count + view_index));
    std::uniform_real_distribution<double> uni(-cfg.view_jitter,
                                               cfg.view_jitter);
    view.offset = {uni(rng), uni(rng)};
  }
  return view;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

double vec_norm(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double mean_grad_norm_tail(const std::vector<MetricsRow>& rows, int tail) {
  if (rows.empty()) return 0.0;
  std::size_t n = std::min<std::size_t>(rows.size(), tail);
  double sum = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) {
    sum += rows[i].grad_norm;
  }
  return sum / static_cast<double>(n);
}

// Per-splat first and second Adam moments use SplatGrad as plain storage.
struct SplatAdam {
  std::vector<SplatGrad> m;
  std::vector<SplatGrad> v;
  int step = 0;

  void reset(std::size_t n) {
    m.assign(n, SplatGrad{});
    v.assign(n, SplatGrad{});
    step = 0;
  }
};

void adam_scalar(double& param, double grad, double rate, const RunConfig& cfg,
                 int step, double& m, double& v) {
  m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
  v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad * grad;
  double mh = m / (1.0 - std::pow(cfg.adam_beta1, step));
  double vh = v / (1.0 - std::pow(cfg.adam_beta2, step));
  param -= rate * mh / (std::sqrt(vh) + cfg.adam_eps);
}

void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>&
                       entries) {
  std::ofstream f(path);
  require(f.good(), ErrorCode::Io, "cannot open " + path.string());
  for (const auto& [k, v] : entries) f << k << "=" << v << "\n";
  require(f.good(), ErrorCode::Io, "failed writing " + path.string());
}

RenderOutput identity_render(const RunConfig& cfg,
                             const Eigen::VectorXd& theta) {
  RenderOutput out;
  out.width = cfg.width;
  out.height = cfg.height;
  const std::size_t n = static_cast<std::size_t>(cfg.width) * cfg.height;
  out.color.assign(n * 3, 0.0);
  if (cfg.channels == 3) {
    for (std::size_t i = 0; i < n * 3; ++i) out.color[i] = theta[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.color[i * 3 + 0] = theta[i];
      out.color[i * 3 + 1] = theta[i];
      out.color[i * 3 + 2] = theta[i];
    }
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index) {
  std::uint64_t h = splitmix64(base + stream * 0xD1B54A32D192ED03ull);
  return splitmix64(h + index * 0x9E3779B97F4A7C15ull);
}

std::string metrics_csv_header() {
  return "iter,loss,grad_norm,gap_ism,gap_tsm,color_grad_pre,color_grad_post,"
         "depth_grad_pre,depth_grad_post,splats,clones,splits,prunes,"
         "distance";
}

std::string metrics_csv_row(const MetricsRow& r) {
  std::ostringstream out;
  out << r.iter << ',' << g17(r.loss) << ',' << g17(r.grad_norm) << ','
      << g17(r.gap_ism) << ',' << g17(r.gap_tsm) << ','
      << g17(r.color_grad_pre) << ',' << g17(r.color_grad_post) << ','
      << g17(r.depth_grad_pre) << ',' << g17(r.depth_grad_post) << ','
      << r.splats << ',' << r.clones << ',' << r.splits << ',' << r.prunes
      << ',' << g17(r.distance);
  return out.str();
}

RunOutputs run_distill(const RunConfig& cfg,
                       const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  OracleBundle bundle = build_oracle(cfg);
  EstimatorConfig est = resolve(cfg.estimator, bundle.schedule);
  LatentLayout layout = cfg.layout();
  const int color_dim = layout.color_dim();
  const std::size_t plane = static_cast<std::size_t>(cfg.width) * cfg.height;
  const bool splat_mode = cfg.generator == GeneratorKind::Splats;

  if (out_dir) {
    std::filesystem::create_directories(*out_dir / "images");
    if (splat_mode) std::filesystem::create_directories(*out_dir / "depth");
  }

  RunOutputs out;
  Eigen::VectorXd theta;
  SplatScene scene;
  if (splat_mode) {
    scene = init_scene(cfg);
  } else {
    theta = init_theta(cfg);
  }

  DensifyStats stats(scene.size());
  Eigen::VectorXd adam_m, adam_v;
  if (!splat_mode) {
    adam_m = Eigen::VectorXd::Zero(theta.size());
    adam_v = Eigen::VectorXd::Zero(theta.size());
  }
  int adam_step = 0;
  SplatAdam splat_adam;
  splat_adam.reset(scene.size());

  auto latent_of = [&](const RenderOutput& r) {
    Eigen::VectorXd vals(layout.dim());
    for (int i = 0; i < color_dim; ++i) vals[i] = r.color[i];
    if (layout.include_depth) {
      for (std::size_t i = 0; i < plane; ++i) {
        vals[color_dim + static_cast<int>(i)] = r.depth[i];
      }
    }
    return Latent{std::move(vals), 0};
  };

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    MetricsRow row;
    row.iter = iter;
    row.splats = static_cast<int>(scene.size());

    Eigen::VectorXd theta_grad;
    std::vector<SplatGrad> agg;
    if (splat_mode) {
      agg.assign(scene.size(), SplatGrad{});
    } else {
      theta_grad = Eigen::VectorXd::Zero(theta.size());
    }
    RenderOutput first_view_render;

    for (int v = 0; v < cfg.view_count; ++v) {
      ViewParam view = make_view(cfg, iter, v);
      RenderOutput rendered;
      Latent latent;
      if (splat_mode) {
        rendered = render(scene, view, cfg.width, cfg.height);
        latent = latent_of(rendered);
      } else {
        latent = {theta, 0};
      }
      if (v == 0) {
        row.distance = (latent.values - bundle.target).norm();
        if (splat_mode) first_view_render = rendered;
      }

      std::uint64_t inst_seed = derive_seed(
          cfg.seed, kStreamEstimator,
          static_cast<std::uint64_t>(iter) * cfg.view_count + v);
      LatentGradient lg;
      switch (cfg.kind) {
        case EstimatorKind::Sds:
          lg = sds_gradient(bundle.oracle, latent, bundle.y, est, inst_seed);
          break;
        case EstimatorKind::Ism:
          lg = ism_gradient(bundle.oracle, latent, bundle.y, est, inst_seed);
          break;
        case EstimatorKind::Tsm:
          lg = tsm_gradient(bundle.oracle, latent, bundle.y, est, inst_seed);
          break;
      }
      GapMetrics gm = gap_metrics(bundle.oracle, latent, est, inst_seed);

      row.loss += lg.loss_proxy;
      row.grad_norm += lg.values.norm();
      row.gap_ism += gm.gap_ism;
      row.gap_tsm += gm.gap_tsm;

      std::vector<double> g_color = to_std(lg.values.head(color_dim));
      std::vector<double> g_depth(plane, 0.0);
      if (layout.include_depth) {
        for (std::size_t i = 0; i < plane; ++i) {
          g_depth[i] = lg.values[color_dim + static_cast<int>(i)];
        }
      }
      if (splat_mode && cfg.depth_noise_scale > 0.0) {
        std::mt19937_64 nrng(derive_seed(
            cfg.seed, kStreamDepthNoise,
            static_cast<std::uint64_t>(iter) * cfg.view_count + v));
        std::student_t_distribution<double> tdist(cfg.depth_noise_df);
        for (std::size_t i = 0; i < plane; ++i) {
          g_depth[i] += cfg.depth_noise_scale * tdist(nrng);
        }
      }

      row.color_grad_pre += vec_norm(g_color);
      row.depth_grad_pre += vec_norm(g_depth);
      if (cfg.clip_color_on) {
        g_color = clip_color(g_color, ColorClipConfig{cfg.clip_color_norm});
      }
      if (cfg.clip_depth_on) {
        DepthClipConfig dc;
        dc.rate = cfg.clip_depth_rate;
        dc.scale_fallback = cfg.clip_depth_scale;
        dc.passthrough_normal = cfg.clip_passthrough;
        if (splat_mode && cfg.clip_depth_use_render_scale) {
          dc.scale_map = rendered.scale_hint;
        }
        g_depth = clip_depth(g_depth, dc);
      }
      row.color_grad_post += vec_norm(g_color);
      row.depth_grad_post += vec_norm(g_depth);

      if (splat_mode) {
        RenderGrad rg;
        rg.color = std::move(g_color);
        bool depth_active = layout.include_depth ||
                            cfg.depth_noise_scale > 0.0 || cfg.clip_depth_on;
        if (depth_active) rg.depth = std::move(g_depth);
        std::vector<SplatGrad> sg =
            render_backward(scene, view, cfg.width, cfg.height, rg);
        for (std::size_t i = 0; i < scene.size(); ++i) {
          agg[i].pos += sg[i].pos;
          agg[i].log_scale += sg[i].log_scale;
          agg[i].rot += sg[i].rot;
          agg[i].color += sg[i].color;
          agg[i].opacity_logit += sg[i].opacity_logit;
          agg[i].z += sg[i].z;
          stats.accumulate(i, sg[i].view_pos_norm);
        }
      } else {
        theta_grad += Eigen::Map<const Eigen::VectorXd>(
            g_color.data(), static_cast<long>(g_color.size()));
      }
    }

    const double inv_views = 1.0 / cfg.view_count;
    row.loss *= inv_views;
    row.grad_norm *= inv_views;
    row.gap_ism *= inv_views;
    row.gap_tsm *= inv_views;
    row.color_grad_pre *= inv_views;
    row.color_grad_post *= inv_views;
    row.depth_grad_pre *= inv_views;
    row.depth_grad_post *= inv_views;
    if (iter == 0) out.initial_distance = row.distance;

    // Parameter update.
    const double lr = cfg.step_size;
    if (!splat_mode) {
      theta_grad *= inv_views;
      if (cfg.optimizer == OptimizerKind::Gd) {
        theta -= lr * theta_grad;
      } else {
        ++adam_step;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
          adam_scalar(theta[i], theta_grad[i], lr, cfg, adam_step, adam_m[i],
                      adam_v[i]);
        }
      }
    } else {
      if (cfg.optimizer == OptimizerKind::Adam) ++splat_adam.step;
      for (std::size_t i = 0; i < scene.size(); ++i) {
        Splat& s = scene.splats[i];
        SplatGrad g = agg[i];
        g.pos *= inv_views;
        g.log_scale *= inv_views;
        g.rot *= inv_views;
        g.color *= inv_views;
        g.opacity_logit *= inv_views;
        g.z *= inv_views;
        if (cfg.optimizer == OptimizerKind::Gd) {
          s.pos -= lr * cfg.pos_rate * g.pos;
          s.log_scale -= lr * cfg.shape_rate * g.log_scale;
          s.rot -= lr * cfg.shape_rate * g.rot;
          s.color -= lr * g.color;
          s.opacity_logit -= lr * g.opacity_logit;
          s.z -= lr * cfg.z_rate * g.z;
        } else {
          SplatGrad& m = splat_adam.m[i];
          SplatGrad& v2 = splat_adam.v[i];
          int st = splat_adam.step;
          adam_scalar(s.pos[0], g.pos[0], lr * cfg.pos_rate, cfg, st,
                      m.pos[0], v2.pos[0]);
          adam_scalar(s.pos[1], g.pos[1], lr * cfg.pos_rate, cfg, st,
                      m.pos[1], v2.pos[1]);
          adam_scalar(s.log_scale[0], g.log_scale[0], lr * cfg.shape_rate,
                      cfg, st, m.log_scale[0], v2.log_scale[0]);
          adam_scalar(s.log_scale[1], g.log_scale[1], lr * cfg.shape_rate,
                      cfg, st, m.log_scale[1], v2.log_scale[1]);
          adam_scalar(s.rot, g.rot, lr * cfg.shape_rate, cfg, st, m.rot,
                      v2.rot);
          for (int k = 0; k < 3; ++k) {
            adam_scalar(s.color[k], g.color[k], lr, cfg, st, m.color[k],
                        v2.color[k]);
          }
          adam_scalar(s.opacity_logit, g.opacity_logit, lr, cfg, st,
                      m.opacity_logit, v2.opacity_logit);
          adam_scalar(s.z, g.z, lr * cfg.z_rate, cfg, st, m.z, v2.z);
        }
        s.color = s.color.cwiseMax(0.0).cwiseMin(1.0);
      }
    }

    // Densification pass (after the update, before logging counts).
    if (splat_mode && cfg.densify_on) {
      auto actions = densify_decide(stats, scene, cfg.densify, iter);
      if (!actions.empty()) {
        DensifyCounts counts = densify_apply(scene, actions, cfg.densify);
        row.clones = counts.clones;
        row.splits = counts.splits;
        row.prunes = counts.prunes;
        out.densify_totals.clones += counts.clones;
        out.densify_totals.splits += counts.splits;
        out.densify_totals.prunes += counts.prunes;
        stats.resize(scene.size());
        splat_adam.reset(scene.size());
      }
    }

    bool last = iter == cfg.iterations - 1;
    if (iter % cfg.log_interval == 0 || last) out.metrics.push_back(row);

    if (out_dir && cfg.image_interval > 0 && iter % cfg.image_interval == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "iter_%06d", iter);
      RenderOutput frame =
          splat_mode ? first_view_render : identity_render(cfg, theta);
      write_png_rgb(*out_dir / "images" / (std::string(name) + ".png"),
                    cfg.width, cfg.height, frame.color);
      if (splat_mode) {
        write_pgm16(*out_dir / "depth" / (std::string(name) + ".pgm"),
                    cfg.width, cfg.height, frame.depth);
      }
    }
  }

  // Final state, rendered under the identity view.
  if (splat_mode) {
    out.scene = scene;
    out.final_render = render(scene, ViewParam{}, cfg.width, cfg.height);
    out.final_distance =
        (latent_of(out.final_render).values - bundle.target).norm();
  } else {
    out.theta = theta;
    out.final_render = identity_render(cfg, theta);
    out.final_distance = (theta - bundle.target).norm();
  }

  if (out_dir) {
    std::ofstream csv(*out_dir / "metrics.csv");
    require(csv.good(), ErrorCode::Io, "cannot open metrics.csv");
    csv << metrics_csv_header() << "\n";
    for (const auto& r : out.metrics) csv << metrics_csv_row(r) << "\n";
    require(csv.good(), ErrorCode::Io, "failed writing metrics.csv");

    write_png_rgb(*out_dir / "images" / "final.png", cfg.width, cfg.height,
                  out.final_render.color);
    if (splat_mode) {
      write_pgm16(*out_dir / "depth" / "final.pgm", cfg.width, cfg.height,
                  out.final_render.depth);
      scene.save(*out_dir / "scene.txt");
    }
    write_summary(
        *out_dir / "summary.txt",
        {{"estimator", estimator_kind_name(cfg.kind)},
         {"iterations", std::to_string(cfg.iterations)},
         {"final_loss",
          g17(out.metrics.empty() ? 0.0 : out.metrics.back().loss)},
         {"initial_distance", g17(out.initial_distance)},
         {"final_distance", g17(out.final_distance)},
         {"final_splats", std::to_string(scene.size())},
         {"clones", std::to_string(out.densify_totals.clones)},
         {"splits", std::to_string(out.densify_totals.splits)},
         {"prunes", std::to_string(out.densify_totals.prunes)},
         {"mean_grad_norm_tail", g17(mean_grad_norm_tail(out.metrics, 100))}});
  }
  return out;
}

TrajectoryStats analyze_trajectory(
    const RunConfig& cfg, int samples,
    const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  require(samples >= 1, ErrorCode::Parameter, "samples must be >= 1");
  OracleBundle bundle = build_oracle(cfg);
  EstimatorConfig est = resolve(cfg.estimator, bundle.schedule);
  const MixtureSpec& data = bundle.oracle.mixture(ConditionLabel::null());
  const int dim = data.dim();

  TrajectoryStats stats;
  stats.rows.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kStreamData, i));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    const auto& comps = data.components();
    std::size_t pick = comps.size() - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      acc += comps[k].weight;
      if (u <= acc) {
        pick = k;
        break;
      }
    }
    Eigen::VectorXd x0 =
        comps[pick].mean + std::sqrt(comps[pick].variance) *
                               sample_standard_normal(dim, rng);
    GapMetrics gm = gap_metrics(bundle.oracle, {x0, 0}, est,
                                derive_seed(cfg.seed, kStreamEstimator, i));
    TrajectoryRow row{i, gm.t, gm.s, gm.mu, gm.gap_ism, gm.gap_tsm};
    stats.rows.push_back(row);
    if (gm.gap_tsm < gm.gap_ism) ++stats.wins;
    if (gm.gap_ism > 0.0) {
      ++stats.ism_positive;
      if (gm.gap_tsm < gm.gap_ism) ++stats.wins_when_positive;
    }
  }
  stats.win_rate = static_cast<double>(stats.wins) / samples;

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream csv(*out_dir / "trajectory.csv");
    require(csv.good(), ErrorCode::Io, "cannot open trajectory.csv");
    csv << "sample,t,s,mu,gap_ism,gap_tsm\n";
    for (const auto& r : stats.rows) {
      csv << r.sample << ',' << r.t << ',' << r.s << ',' << r.mu << ','
          << g17(r.gap_ism) << ',' << g17(r.gap_tsm) << "\n";
    }
    require(csv.good(), ErrorCode::Io, "failed writing trajectory.csv");
    write_summary(*out_dir / "summary.txt",
                  {{"samples", std::to_string(samples)},
                   {"wins", std::to_string(stats.wins)},
                   {"win_rate", g17(stats.win_rate)},
                   {"ism_positive", std::to_string(stats.ism_positive)},
                   {"wins_when_positive",
                    std::to_string(stats.wins_when_positive)}});
  }
  return stats;
}

std::vector<GammaRow> ablate_gamma(
    const RunConfig& cfg, const std::vector<double>& gammas,
    const std::optional<std::filesystem::path>& out_dir) {
  require(!gammas.empty(), ErrorCode::Parameter, "need at least one gamma");
  for (double g : gammas) {
    require(std::isfinite(g) && g >= 0.0 && g <= 1.0, ErrorCode::Parameter,
            "gamma must lie in [0, 1]");
  }
  std::vector<std::future<RunOutputs>> futures;
  futures.reserve(gammas.size());
  for (double g : gammas) {
    RunConfig sub = cfg;
    sub.kind = EstimatorKind::Tsm;
    sub.estimator.gamma = g;
    std::optional<std::filesystem::path> sub_dir;
    if (out_dir) sub_dir = *out_dir / ("gamma_" + gshort(g));
    futures.push_back(std::async(
        std::launch::async,
        [sub, sub_dir]() { return run_distill(sub, sub_dir); }));
  }
  std::vector<GammaRow> rows;
  rows.reserve(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    RunOutputs r = futures[i].get();
    GammaRow row;
    row.gamma = gammas[i];
    row.final_loss = r.metrics.empty() ? 0.0 : r.metrics.back().loss;
    row.final_distance = r.final_distance;
    row.mean_grad_norm_tail = mean_grad_norm_tail(r.metrics, 100);
    rows.push_back(row);
  }
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream csv(*out_dir / "ablation.csv");
    require(csv.good(), ErrorCode::Io, "cannot open ablation.csv");
    csv << "gamma,final_loss,final_distance,mean_grad_norm_tail\n";
    for (const auto& r : rows) {
      csv << gshort(r.gamma) << ',' << g17(r.final_loss) << ','
          << g17(r.final_distance) << ',' << g17(r.mean_grad_norm_tail)
          << "\n";
    }
    require(csv.good(), ErrorCode::Io, "failed writing ablation.csv");
  }
  return rows;
}

ConsistencyStats seed_consistency(
    const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
    const std::optional<std::filesystem::path>& out_dir) {
  require(seeds.size() >= 2, ErrorCode::Parameter, "need at least two seeds");
  std::vector<std::future<RunOutputs>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t s : seeds) {
    RunConfig sub = cfg;
    sub.seed = s;
    std::optional<std::filesystem::path> sub_dir;
    if (out_dir) sub_dir = *out_dir / ("seed_" + std::to_string(s));
    futures.push_back(std::async(
        std::launch::async,
        [sub, sub_dir]() { return run_distill(sub, sub_dir); }));
  }

  ConsistencyStats stats;
  std::vector<RunOutputs> runs;
  runs.reserve(seeds.size());
  for (auto& f : futures) runs.push_back(f.get());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    stats.rows.push_back(
        {seeds[i],
         runs[i].metrics.empty() ? 0.0 : runs[i].metrics.back().loss,
         runs[i].final_distance});
  }

  stats.width = runs[0].final_render.width;
  stats.height = runs[0].final_render.height;
  const std::size_t n = runs[0].final_render.color.size();
  const double count = static_cast<double>(runs.size());
  std::vector<double> mean(n, 0.0), var(n, 0.0);
  for (const auto& r : runs) {
    require(r.final_render.color.size() == n, ErrorCode::Parameter,
            "render size mismatch across seeds");
    for (std::size_t i = 0; i < n; ++i) mean[i] += r.final_render.color[i];
  }
  for (std::size_t i = 0; i < n; ++i) mean[i] /= count;
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = r.final_render.color[i] - mean[i];
      var[i] += d * d;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var[i] /= count;
    total += var[i];
  }
  stats.mean_color_variance = total / static_cast<double>(n);
  stats.variance_map.assign(n / 3, 0.0);
  for (std::size_t p = 0; p < n / 3; ++p) {
    stats.variance_map[p] =
        (var[p * 3] + var[p * 3 + 1] + var[p * 3 + 2]) / 3.0;
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream csv(*out_dir / "consistency.csv");
    require(csv.good(), ErrorCode::Io, "cannot open consistency.csv");
    csv << "seed,final_loss,final_distance\n";
    for (const auto& r : stats.rows) {
      csv << r.seed << ',' << g17(r.final_loss) << ','
          << g17(r.final_distance) << "\n";
    }
    require(csv.good(), ErrorCode::Io, "failed writing consistency.csv");
    write_pgm16(*out_dir / "variance.pgm", stats.width, stats.height,
                stats.variance_map);
    double peak = 0.0;
    for (double v : stats.variance_map) peak = std::max(peak, v);
    std::vector<double> vis(n, 0.0);
    for (std::size_t p = 0; p < stats.variance_map.size(); ++p) {
      double v = peak > 0.0 ? stats.variance_map[p] / peak : 0.0;
      vis[p * 3 + 0] = v;
      vis[p * 3 + 1] = v;
      vis[p * 3 + 2] = v;
    }
    write_png_rgb(*out_dir / "variance.png", stats.width, stats.height, vis);
    write_summary(*out_dir / "summary.txt",
                  {{"seeds", std::to_string(seeds.size())},
                   {"mean_color_variance", g17(stats.mean_color_variance)}});
  }
  return stats;
}

std::vector<CompareRow> compare_estimators(
    const RunConfig& cfg,
    const std::optional<std::filesystem::path>& out_dir) {
  const EstimatorKind kinds[] = {EstimatorKind::Sds, EstimatorKind::Ism,
                                 EstimatorKind::Tsm};
  std::vector<std::future<RunOutputs>> futures;
  for (EstimatorKind k : kinds) {
    RunConfig sub = cfg;
    sub.kind = k;
    std::optional<std::filesystem::path> sub_dir;
    if (out_dir) sub_dir = *out_dir / estimator_kind_name(k);
    futures.push_back(std::async(
        std::launch::async,
        [sub, sub_dir]() { return run_distill(sub, sub_dir); }));
  }
  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < 3; ++i) {
    RunOutputs r = futures[i].get();
    CompareRow row;
    row.kind = kinds[i];
    row.final_loss = r.metrics.empty() ? 0.0 : r.metrics.back().loss;
    row.final_distance = r.final_distance;
    row.mean_grad_norm_tail = mean_grad_norm_tail(r.metrics, 100);
    rows.push_back(row);
  }
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream csv(*out_dir / "compare.csv");
    require(csv.good(), ErrorCode::Io, "cannot open compare.csv");
    csv << "estimator,final_loss,final_distance,mean_grad_norm_tail\n";
    for (const auto& r : rows) {
      csv << estimator_kind_name(r.kind) << ',' << g17(r.final_loss) << ','
          << g17(r.final_distance) << ',' << g17(r.mean_grad_norm_tail)
          << "\n";
    }
    require(csv.good(), ErrorCode::Io, "failed writing compare.csv");
  }
  return rows;
}

}  // namespace tsmlab

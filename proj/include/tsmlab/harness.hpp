// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "tsmlab/config.hpp"
#include "tsmlab/generator.hpp"

namespace tsmlab {

// Stable seed derivation for per-iteration streams. Identical inputs give
// identical seeds on every platform.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index);

struct MetricsRow {
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;  // latent gradient before clipping
  double gap_ism = 0.0;
  double gap_tsm = 0.0;
  double color_grad_pre = 0.0;
  double color_grad_post = 0.0;
  double depth_grad_pre = 0.0;
  double depth_grad_post = 0.0;
  int splats = 0;
  int clones = 0;
  int splits = 0;
  int prunes = 0;
  double distance = 0.0;  // latent distance to the condition mixture mean
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct RunOutputs {
  std::vector<MetricsRow> metrics;
  Eigen::VectorXd theta;      // identity generator parameters (final)
  SplatScene scene;           // splat generator state (final)
  RenderOutput final_render;  // identity-view render of the final state
  double initial_distance = 0.0;
  double final_distance = 0.0;
  DensifyCounts densify_totals;
};

// One full distillation run. When out_dir is set it receives metrics.csv,
// summary.txt, images/, depth/ (splat mode) and scene.txt (splat mode).
RunOutputs run_distill(const RunConfig& config,
                       const std::optional<std::filesystem::path>& out_dir);

struct TrajectoryRow {
  int sample = 0;
  int t = 0, s = 0, mu = 0;
  double gap_ism = 0.0;
  double gap_tsm = 0.0;
};

struct TrajectoryStats {
  std::vector<TrajectoryRow> rows;
  int wins = 0;               // gap_tsm < gap_ism
  int ism_positive = 0;       // gap_ism > 0
  int wins_when_positive = 0; // gap_tsm < gap_ism among those
  double win_rate = 0.0;
};

// Monte-Carlo comparison of the two drift bounds on data drawn from the
// unconditional mixture. Writes trajectory.csv and summary.txt.
TrajectoryStats analyze_trajectory(
    const RunConfig& config, int samples,
    const std::optional<std::filesystem::path>& out_dir);

struct GammaRow {
  double gamma = 0.0;
  double final_loss = 0.0;
  double final_distance = 0.0;
  double mean_grad_norm_tail = 0.0;  // over the last 100 logged rows
};

// Full runs (trajectory estimator) at each offset rate, executed
// concurrently. Writes ablation.csv plus one run directory per rate.
std::vector<GammaRow> ablate_gamma(
    const RunConfig& config, const std::vector<double>& gammas,
    const std::optional<std::filesystem::path>& out_dir);

struct SeedRow {
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double final_distance = 0.0;
};

struct ConsistencyStats {
  std::vector<SeedRow> rows;
  int width = 0;
  int height = 0;
  std::vector<double> variance_map;   // h*w, channel-mean across-seed variance
  double mean_color_variance = 0.0;   // mean over all pixels and channels
};

// Matched-config runs across seeds, executed concurrently; reports the
// per-pixel variance of the final renders. Writes consistency.csv, the
// variance map and one run directory per seed.
ConsistencyStats seed_consistency(
    const RunConfig& config, const std::vector<std::uint64_t>& seeds,
    const std::optional<std::filesystem::path>& out_dir);

struct CompareRow {
  EstimatorKind kind = EstimatorKind::Sds;
  double final_loss = 0.0;
  double final_distance = 0.0;
  double mean_grad_norm_tail = 0.0;
};

// Same seed and init through all three estimators, executed concurrently.
// Writes compare.csv plus one run directory per estimator.
std::vector<CompareRow> compare_estimators(
    const RunConfig& config,
    const std::optional<std::filesystem::path>& out_dir);

}  // namespace tsmlab

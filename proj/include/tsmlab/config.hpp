// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tsmlab/clipping.hpp"
#include "tsmlab/densify.hpp"
#include "tsmlab/error.hpp"
#include "tsmlab/estimators.hpp"

namespace tsmlab {

// Flat "key = value" file. '#' lines are comments, keys may repeat (the
// oracle component lists rely on that). Typed getters record which keys
// were consumed so unknown keys can be rejected afterwards.
class KeyValues {
 public:
  static KeyValues parse_file(const std::filesystem::path& path);
  static KeyValues parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::vector<std::string> all(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Replaces every earlier value for the key.
  void set(const std::string& key, const std::string& value);

  // Raises a config error naming the first key never consumed by a getter.
  void reject_unknown() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> consumed_;
};

enum class EstimatorKind { Sds, Ism, Tsm };
enum class GeneratorKind { Identity, Splats };
enum class OptimizerKind { Gd, Adam };

const char* estimator_kind_name(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& name);

// How a mixture component's mean vector is produced once the latent
// dimension is known.
struct MeanSpec {
  enum class Kind { Fill, Inline, Image } kind = Kind::Fill;
  std::vector<double> values;  // Fill: repeated cyclically; Inline: exact
  std::string image_path;     // Image: PNG resized check against layout
};

struct ComponentSpec {
  double weight = 1.0;
  MeanSpec mean;
  double variance = 1.0;
};

struct LatentLayout {
  int width = 1;
  int height = 1;
  int channels = 3;
  bool include_depth = false;

  int color_dim() const { return width * height * channels; }
  int dim() const { return color_dim() + (include_depth ? width * height : 0); }
};

Eigen::VectorXd resolve_mean(const MeanSpec& spec, const LatentLayout& layout);

struct RunConfig {
  // schedule
  int steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  // oracle: label -1 holds the unconditional mixture
  std::map<int, std::vector<ComponentSpec>> mixtures;
  int condition = -2;  // -2 = auto (lowest label, else null), -1 = null

  // estimator
  EstimatorKind kind = EstimatorKind::Tsm;
  EstimatorConfig estimator;

  // generator
  GeneratorKind generator = GeneratorKind::Identity;
  int width = 8;
  int height = 8;
  int channels = 3;          // identity only
  bool include_depth = false;
  std::string identity_init = "fill:0.5";
  int splat_count = 64;
  double splat_scale = 1.5;
  double splat_opacity = 0.6;
  std::string splat_color = "gray";  // gray | random
  std::string splat_z = "spread";    // spread | random
  std::uint64_t init_seed = 1234567;

  // views
  int view_count = 1;
  double view_jitter = 0.0;

  // optimizer
  OptimizerKind optimizer = OptimizerKind::Gd;
  double step_size = 0.05;
  int iterations = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double pos_rate = 1.0;    // multipliers on step_size per parameter group
  double shape_rate = 1.0;  // log_scale and rot
  double z_rate = 1.0;

  // clipping
  bool clip_color_on = false;
  double clip_color_norm = 1.0;
  bool clip_depth_on = false;
  double clip_depth_rate = 0.1;
  double clip_depth_scale = 1.0;
  bool clip_depth_use_render_scale = true;
  bool clip_passthrough = false;

  // densification
  bool densify_on = false;
  DensifyConfig densify;

  // injected heavy-tailed depth-gradient noise
  double depth_noise_scale = 0.0;
  double depth_noise_df = 2.0;

  // run
  std::uint64_t seed = 1;
  int log_interval = 1;
  int image_interval = 0;  // 0 = final only

  static RunConfig from_kv(const KeyValues& kv);
  static RunConfig from_file(const std::filesystem::path& path);

  LatentLayout layout() const;
  void validate() const;
};

}  // namespace tsmlab

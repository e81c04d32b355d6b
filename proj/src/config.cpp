// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tsmlab/image_io.hpp"

namespace tsmlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& text,
                               const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    require(!item.empty(), ErrorCode::Config, where + ": empty list entry");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), ErrorCode::Config,
              where + ": bad number '" + item + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      raise(ErrorCode::Config, where + ": bad number '" + item + "'");
    }
  }
  require(!out.empty(), ErrorCode::Config, where + ": empty list");
  return out;
}

MeanSpec parse_mean_spec(const std::string& token, const std::string& where) {
  MeanSpec spec;
  auto colon = token.find(':');
  require(colon != std::string::npos, ErrorCode::Config,
          where + ": mean source needs a 'kind:payload' form");
  std::string kind = token.substr(0, colon);
  std::string payload = token.substr(colon + 1);
  if (kind == "fill") {
    spec.kind = MeanSpec::Kind::Fill;
    spec.values = parse_list(payload, where);
  } else if (kind == "inline") {
    spec.kind = MeanSpec::Kind::Inline;
    spec.values = parse_list(payload, where);
  } else if (kind == "image") {
    spec.kind = MeanSpec::Kind::Image;
    require(!payload.empty(), ErrorCode::Config, where + ": empty image path");
    spec.image_path = payload;
  } else {
    raise(ErrorCode::Config, where + ": unknown mean source '" + kind + "'");
  }
  return spec;
}

ComponentSpec parse_component(const std::string& value,
                              const std::string& where) {
  std::istringstream in(value);
  ComponentSpec c;
  std::string source;
  if (!(in >> c.weight >> source >> c.variance)) {
    raise(ErrorCode::Config,
          where + ": expected '<weight> <mean-source> <variance>'");
  }
  std::string rest;
  require(!(in >> rest), ErrorCode::Config, where + ": trailing tokens");
  c.mean = parse_mean_spec(source, where);
  return c;
}

}  // namespace

KeyValues KeyValues::parse_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    require(eq != std::string::npos, ErrorCode::Config,
            "line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    require(!key.empty(), ErrorCode::Config,
            "line " + std::to_string(line_no) + ": empty key");
    kv.entries_.emplace_back(key, value);
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_text(buf.str());
}

bool KeyValues::has(const std::string& key) const {
  consumed_.insert(key);
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == key; });
}

std::vector<std::string> KeyValues::all(const std::string& key) const {
  consumed_.insert(key);
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.first == key) out.push_back(e.second);
  }
  return out;
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto v = all(key);
  return v.empty() ? fallback : v.back();
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto v = all(key);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(v.back(), &used);
    require(used == v.back().size(), ErrorCode::Config,
            key + ": bad number '" + v.back() + "'");
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(ErrorCode::Config, key + ": bad number '" + v.back() + "'");
  }
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  auto v = all(key);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    long long d = std::stoll(v.back(), &used);
    require(used == v.back().size(), ErrorCode::Config,
            key + ": bad integer '" + v.back() + "'");
    return static_cast<int>(d);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(ErrorCode::Config, key + ": bad integer '" + v.back() + "'");
  }
}

std::uint64_t KeyValues::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto v = all(key);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    unsigned long long d = std::stoull(v.back(), &used);
    require(used == v.back().size(), ErrorCode::Config,
            key + ": bad integer '" + v.back() + "'");
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(ErrorCode::Config, key + ": bad integer '" + v.back() + "'");
  }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  auto v = all(key);
  if (v.empty()) return fallback;
  std::string s = v.back();
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  raise(ErrorCode::Config, key + ": bad boolean '" + v.back() + "'");
}

void KeyValues::set(const std::string& key, const std::string& value) {
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                [&](const auto& e) { return e.first == key; }),
                 entries_.end());
  entries_.emplace_back(key, value);
}

void KeyValues::reject_unknown() const {
  for (const auto& e : entries_) {
    require(consumed_.count(e.first) > 0, ErrorCode::Config,
            "unknown config key '" + e.first + "'");
  }
}

const char* estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Sds: return "sds";
    case EstimatorKind::Ism: return "ism";
    case EstimatorKind::Tsm: return "tsm";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  if (name == "sds") return EstimatorKind::Sds;
  if (name == "ism") return EstimatorKind::Ism;
  if (name == "tsm") return EstimatorKind::Tsm;
  raise(ErrorCode::Config, "unknown estimator kind '" + name + "'");
}

Eigen::VectorXd resolve_mean(const MeanSpec& spec, const LatentLayout& layout) {
  const int dim = layout.dim();
  Eigen::VectorXd mean(dim);
  switch (spec.kind) {
    case MeanSpec::Kind::Fill:
      for (int i = 0; i < dim; ++i) {
        mean[i] = spec.values[static_cast<std::size_t>(i) % spec.values.size()];
      }
      return mean;
    case MeanSpec::Kind::Inline:
      require(static_cast<int>(spec.values.size()) == dim, ErrorCode::Config,
              "inline mean needs exactly " + std::to_string(dim) + " values");
      for (int i = 0; i < dim; ++i) mean[i] = spec.values[i];
      return mean;
    case MeanSpec::Kind::Image: {
      require(layout.channels == 3, ErrorCode::Config,
              "image means need a 3-channel latent");
      ImageRgb img = read_png_rgb(spec.image_path);
      require(img.width == layout.width && img.height == layout.height,
              ErrorCode::Config, "image mean size mismatch");
      mean.setZero();
      for (int i = 0; i < layout.color_dim(); ++i) mean[i] = img.rgb[i];
      return mean;
    }
  }
  raise(ErrorCode::Config, "unreachable mean kind");
}

RunConfig RunConfig::from_kv(const KeyValues& kv) {
  RunConfig c;
  c.steps = kv.get_int("schedule.steps", c.steps);
  c.beta_start = kv.get_double("schedule.beta_start", c.beta_start);
  c.beta_end = kv.get_double("schedule.beta_end", c.beta_end);
  std::string w = kv.get_string("schedule.weight", "constant");
  if (w == "constant") {
    c.estimator.weight = WeightKind::Constant;
  } else if (w == "sigma") {
    c.estimator.weight = WeightKind::SigmaWeighted;
  } else {
    raise(ErrorCode::Config, "schedule.weight: unknown kind '" + w + "'");
  }

  for (int label = -1; label < 64; ++label) {
    std::string key = label < 0
                          ? "oracle.null.component"
                          : "oracle.label" + std::to_string(label) +
                                ".component";
    auto lines = kv.all(key);
    if (lines.empty()) continue;
    std::vector<ComponentSpec> comps;
    for (const auto& line : lines) comps.push_back(parse_component(line, key));
    c.mixtures[label] = std::move(comps);
  }
  if (c.mixtures.find(-1) == c.mixtures.end()) {
    ComponentSpec standard;
    standard.weight = 1.0;
    standard.mean.kind = MeanSpec::Kind::Fill;
    standard.mean.values = {0.0};
    standard.variance = 1.0;
    c.mixtures[-1] = {standard};
  }
  std::string cond = kv.get_string("oracle.condition", "auto");
  if (cond == "auto") {
    c.condition = -1;
    for (const auto& [label, comps] : c.mixtures) {
      (void)comps;
      if (label >= 0) {
        c.condition = label;
        break;
      }
    }
  } else if (cond == "null") {
    c.condition = -1;
  } else if (cond.rfind("label", 0) == 0) {
    try {
      c.condition = std::stoi(cond.substr(5));
    } catch (const std::exception&) {
      raise(ErrorCode::Config, "oracle.condition: bad label '" + cond + "'");
    }
  } else {
    raise(ErrorCode::Config, "oracle.condition: bad value '" + cond + "'");
  }

  c.kind = parse_estimator_kind(kv.get_string("estimator.kind", "tsm"));
  c.estimator.delta_T = kv.get_int("estimator.delta_t", c.estimator.delta_T);
  c.estimator.delta_S = kv.get_int("estimator.delta_s", c.estimator.delta_S);
  c.estimator.gamma = kv.get_double("estimator.gamma", c.estimator.gamma);
  c.estimator.t_min = kv.get_int("estimator.t_min", c.estimator.t_min);
  c.estimator.t_max = kv.get_int("estimator.t_max", c.estimator.t_max);
  c.estimator.guidance_scale =
      kv.get_double("estimator.guidance", c.estimator.guidance_scale);
  std::string mode = kv.get_string("estimator.mode", "standard");
  if (mode == "standard" || mode == "ddim-standard") {
    c.estimator.mode = FormulaMode::DdimStandard;
  } else if (mode == "swapped" || mode == "paper-literal") {
    c.estimator.mode = FormulaMode::SigmaSwapped;
  } else {
    raise(ErrorCode::Config, "estimator.mode: unknown mode '" + mode + "'");
  }

  std::string gen = kv.get_string("generator.kind", "identity");
  if (gen == "identity") {
    c.generator = GeneratorKind::Identity;
  } else if (gen == "splats") {
    c.generator = GeneratorKind::Splats;
  } else {
    raise(ErrorCode::Config, "generator.kind: unknown kind '" + gen + "'");
  }
  c.width = kv.get_int("generator.width", c.width);
  c.height = kv.get_int("generator.height", c.height);
  c.channels = kv.get_int("generator.channels", c.channels);
  c.include_depth = kv.get_bool("generator.include_depth", c.include_depth);
  c.identity_init = kv.get_string("generator.init", c.identity_init);
  c.splat_count = kv.get_int("generator.splat_count", c.splat_count);
  c.splat_scale = kv.get_double("generator.splat_scale", c.splat_scale);
  c.splat_opacity = kv.get_double("generator.splat_opacity", c.splat_opacity);
  c.splat_color = kv.get_string("generator.splat_color", c.splat_color);
  c.splat_z = kv.get_string("generator.splat_z", c.splat_z);
  c.init_seed = kv.get_u64("generator.init_seed", c.init_seed);

  c.view_count = kv.get_int("view.count", c.view_count);
  c.view_jitter = kv.get_double("view.jitter", c.view_jitter);

  std::string opt = kv.get_string("optimizer.kind", "gd");
  if (opt == "gd") {
    c.optimizer = OptimizerKind::Gd;
  } else if (opt == "adam") {
    c.optimizer = OptimizerKind::Adam;
  } else {
    raise(ErrorCode::Config, "optimizer.kind: unknown kind '" + opt + "'");
  }
  c.step_size = kv.get_double("optimizer.step_size", c.step_size);
  c.iterations = kv.get_int("optimizer.iterations", c.iterations);
  c.adam_beta1 = kv.get_double("optimizer.adam_beta1", c.adam_beta1);
  c.adam_beta2 = kv.get_double("optimizer.adam_beta2", c.adam_beta2);
  c.adam_eps = kv.get_double("optimizer.adam_eps", c.adam_eps);
  c.pos_rate = kv.get_double("optimizer.pos_rate", c.pos_rate);
  c.shape_rate = kv.get_double("optimizer.shape_rate", c.shape_rate);
  c.z_rate = kv.get_double("optimizer.z_rate", c.z_rate);

  c.clip_color_on = kv.get_bool("clip.color", c.clip_color_on);
  c.clip_color_norm = kv.get_double("clip.color_norm", c.clip_color_norm);
  c.clip_depth_on = kv.get_bool("clip.depth", c.clip_depth_on);
  c.clip_depth_rate = kv.get_double("clip.depth_rate", c.clip_depth_rate);
  c.clip_depth_scale = kv.get_double("clip.depth_scale", c.clip_depth_scale);
  c.clip_depth_use_render_scale =
      kv.get_bool("clip.depth_render_scale", c.clip_depth_use_render_scale);
  c.clip_passthrough = kv.get_bool("clip.passthrough", c.clip_passthrough);

  c.densify_on = kv.get_bool("densify.enabled", c.densify_on);
  c.densify.tau_pos = kv.get_double("densify.tau_pos", c.densify.tau_pos);
  c.densify.sigma_split =
      kv.get_double("densify.sigma_split", c.densify.sigma_split);
  c.densify.tau_opacity =
      kv.get_double("densify.tau_opacity", c.densify.tau_opacity);
  c.densify.start_iter = kv.get_int("densify.start", c.densify.start_iter);
  c.densify.end_iter = kv.get_int("densify.end", c.densify.end_iter);
  c.densify.interval = kv.get_int("densify.interval", c.densify.interval);
  c.densify.split_scale_divisor =
      kv.get_double("densify.split_divisor", c.densify.split_scale_divisor);
  c.densify.split_offset =
      kv.get_double("densify.split_offset", c.densify.split_offset);

  c.depth_noise_scale = kv.get_double("noise.depth_scale", c.depth_noise_scale);
  c.depth_noise_df = kv.get_double("noise.depth_df", c.depth_noise_df);

  c.seed = kv.get_u64("run.seed", c.seed);
  c.log_interval = kv.get_int("run.log_interval", c.log_interval);
  c.image_interval = kv.get_int("run.image_interval", c.image_interval);

  kv.reject_unknown();
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_kv(KeyValues::parse_file(path));
}

LatentLayout RunConfig::layout() const {
  LatentLayout l;
  l.width = width;
  l.height = height;
  l.channels = generator == GeneratorKind::Identity ? channels : 3;
  l.include_depth = generator == GeneratorKind::Splats && include_depth;
  return l;
}

void RunConfig::validate() const {
  require(steps >= 1, ErrorCode::Parameter, "schedule.steps must be >= 1");
  NoiseSchedule schedule = NoiseSchedule::linear(steps, beta_start, beta_end);
  resolve(estimator, schedule);

  require(mixtures.count(-1) == 1, ErrorCode::Parameter,
          "an unconditional mixture is required");
  require(condition == -1 || mixtures.count(condition) == 1,
          ErrorCode::Condition, "oracle.condition names an unknown label");
  if (estimator.guidance_scale > 1.0) {
    require(condition >= 0, ErrorCode::Condition,
            "guidance above 1 needs a non-null condition label");
  }
  for (const auto& [label, comps] : mixtures) {
    (void)label;
    require(!comps.empty(), ErrorCode::Parameter, "empty mixture");
    for (const auto& comp : comps) {
      require(std::isfinite(comp.weight) && comp.weight > 0.0,
              ErrorCode::Parameter, "component weights must be positive");
      require(std::isfinite(comp.variance) && comp.variance > 0.0,
              ErrorCode::Parameter, "component variances must be positive");
    }
  }

  require(width >= 1 && height >= 1, ErrorCode::Parameter,
          "generator dimensions must be >= 1");
  if (generator == GeneratorKind::Identity) {
    require(channels == 1 || channels == 3, ErrorCode::Parameter,
            "generator.channels must be 1 or 3");
    require(!include_depth, ErrorCode::Parameter,
            "include_depth needs the splat generator");
    require(!clip_depth_on && depth_noise_scale == 0.0, ErrorCode::Parameter,
            "depth clipping and depth noise need the splat generator");
  } else {
    require(splat_count >= 1, ErrorCode::Parameter,
            "generator.splat_count must be >= 1");
    require(splat_scale > 0.0, ErrorCode::Parameter,
            "generator.splat_scale must be positive");
    require(splat_opacity > 0.0 && splat_opacity < 1.0, ErrorCode::Parameter,
            "generator.splat_opacity must lie in (0, 1)");
    require(splat_color == "gray" || splat_color == "random",
            ErrorCode::Parameter, "generator.splat_color: gray or random");
    require(splat_z == "spread" || splat_z == "random", ErrorCode::Parameter,
            "generator.splat_z: spread or random");
  }

  require(view_count >= 1, ErrorCode::Parameter, "view.count must be >= 1");
  require(std::isfinite(view_jitter) && view_jitter >= 0.0,
          ErrorCode::Parameter, "view.jitter must be >= 0");

  require(std::isfinite(step_size) && step_size > 0.0, ErrorCode::Parameter,
          "optimizer.step_size must be positive");
  require(iterations >= 1, ErrorCode::Parameter,
          "optimizer.iterations must be >= 1");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 &&
              adam_beta2 < 1.0 && adam_eps > 0.0,
          ErrorCode::Parameter, "bad adam parameters");
  require(pos_rate > 0.0 && shape_rate > 0.0 && z_rate > 0.0,
          ErrorCode::Parameter, "optimizer rate multipliers must be positive");

  if (clip_color_on) {
    require(std::isfinite(clip_color_norm) && clip_color_norm > 0.0,
            ErrorCode::Parameter, "clip.color_norm must be positive");
  }
  if (clip_depth_on) {
    require(std::isfinite(clip_depth_rate) && clip_depth_rate > 0.0,
            ErrorCode::Parameter, "clip.depth_rate must be positive");
    require(std::isfinite(clip_depth_scale) && clip_depth_scale > 0.0,
            ErrorCode::Parameter, "clip.depth_scale must be positive");
  }
  if (densify_on) {
    require(generator == GeneratorKind::Splats, ErrorCode::Parameter,
            "densification needs the splat generator");
    tsmlab::validate(densify);
  }
  require(std::isfinite(depth_noise_scale) && depth_noise_scale >= 0.0,
          ErrorCode::Parameter, "noise.depth_scale must be >= 0");
  require(std::isfinite(depth_noise_df) && depth_noise_df > 0.0,
          ErrorCode::Parameter, "noise.depth_df must be positive");

  require(log_interval >= 1, ErrorCode::Parameter,
          "run.log_interval must be >= 1");
  require(image_interval >= 0, ErrorCode::Parameter,
          "run.image_interval must be >= 0");

  LatentLayout l = layout();
  for (const auto& [label, comps] : mixtures) {
    (void)label;
    for (const auto& comp : comps) {
      if (comp.mean.kind == MeanSpec::Kind::Inline) {
        require(static_cast<int>(comp.mean.values.size()) == l.dim(),
                ErrorCode::Config, "inline mean length mismatch");
      }
    }
  }
}

}  // namespace tsmlab

// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsmlab/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // key=value
  std::string seed;
  std::string estimator;
  std::string gamma;
  std::string mode;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides,
                  "override a config entry, e.g. --set run.seed=7");
  cmd->add_option("--seed", args.seed, "override run.seed");
  cmd->add_option("--estimator", args.estimator,
                  "override estimator.kind: sds | ism | tsm");
  cmd->add_option("--gamma", args.gamma, "override estimator.gamma");
  cmd->add_option("--mode", args.mode,
                  "override estimator.mode: ddim-standard | paper-literal");
}

tsmlab::RunConfig load_config(const CommonArgs& args) {
  tsmlab::KeyValues kv = tsmlab::KeyValues::parse_file(args.config_path);
  for (const auto& o : args.overrides) {
    auto eq = o.find('=');
    tsmlab::require(eq != std::string::npos && eq > 0, tsmlab::ErrorCode::Config,
                    "--set needs key=value, got '" + o + "'");
    kv.set(o.substr(0, eq), o.substr(eq + 1));
  }
  // Dedicated flags win over --set on the same key.
  if (!args.seed.empty()) kv.set("run.seed", args.seed);
  if (!args.estimator.empty()) kv.set("estimator.kind", args.estimator);
  if (!args.gamma.empty()) kv.set("estimator.gamma", args.gamma);
  if (!args.mode.empty()) kv.set("estimator.mode", args.mode);
  return tsmlab::RunConfig::from_kv(kv);
}

std::optional<std::filesystem::path> out_of(const CommonArgs& args) {
  if (args.out_dir.empty()) return std::nullopt;
  return std::filesystem::path(args.out_dir);
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoull(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score distillation laboratory"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run_cmd = app.add_subcommand("run-distill", "run one distillation");
  add_common(run_cmd, run_args);

  CommonArgs traj_args;
  int traj_samples = 1000;
  auto* traj_cmd = app.add_subcommand("analyze-trajectory",
                                      "compare drift bounds on sampled data");
  add_common(traj_cmd, traj_args);
  traj_cmd->add_option("--samples", traj_samples, "number of instances");

  CommonArgs gamma_args;
  std::string gamma_list = "0.3";
  auto* gamma_cmd =
      app.add_subcommand("ablate-gamma", "sweep the offset rate");
  add_common(gamma_cmd, gamma_args);
  gamma_cmd->add_option("--gammas", gamma_list, "comma separated rates");

  CommonArgs seed_args;
  std::string seed_list = "1,2,3,4";
  auto* seed_cmd = app.add_subcommand("seed-consistency",
                                      "matched runs across noise seeds");
  add_common(seed_cmd, seed_args);
  seed_cmd->add_option("--seeds", seed_list, "comma separated seeds");

  CommonArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare-estimators",
                                     "same run through sds, ism and tsm");
  add_common(cmp_cmd, cmp_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      tsmlab::RunConfig cfg = load_config(run_args);
      tsmlab::RunOutputs out = tsmlab::run_distill(cfg, out_of(run_args));
      double final_loss = out.metrics.empty() ? 0.0 : out.metrics.back().loss;
      std::printf("estimator=%s iterations=%d final_loss=%.6g "
                  "initial_distance=%.6g final_distance=%.6g splats=%zu\n",
                  tsmlab::estimator_kind_name(cfg.kind), cfg.iterations,
                  final_loss, out.initial_distance, out.final_distance,
                  out.scene.size());
    } else if (*traj_cmd) {
      tsmlab::RunConfig cfg = load_config(traj_args);
      tsmlab::TrajectoryStats stats =
          tsmlab::analyze_trajectory(cfg, traj_samples, out_of(traj_args));
      std::printf("samples=%d wins=%d win_rate=%.6g ism_positive=%d "
                  "wins_when_positive=%d\n",
                  static_cast<int>(stats.rows.size()), stats.wins,
                  stats.win_rate, stats.ism_positive,
                  stats.wins_when_positive);
    } else if (*gamma_cmd) {
      tsmlab::RunConfig cfg = load_config(gamma_args);
      auto rows = tsmlab::ablate_gamma(cfg, parse_doubles(gamma_list),
                                       out_of(gamma_args));
      for (const auto& r : rows) {
        std::printf("gamma=%g final_loss=%.6g final_distance=%.6g "
                    "mean_grad_norm_tail=%.6g\n",
                    r.gamma, r.final_loss, r.final_distance,
                    r.mean_grad_norm_tail);
      }
    } else if (*seed_cmd) {
      tsmlab::RunConfig cfg = load_config(seed_args);
      tsmlab::ConsistencyStats stats = tsmlab::seed_consistency(
          cfg, parse_seeds(seed_list), out_of(seed_args));
      for (const auto& r : stats.rows) {
        std::printf("seed=%llu final_loss=%.6g final_distance=%.6g\n",
                    static_cast<unsigned long long>(r.seed), r.final_loss,
                    r.final_distance);
      }
      std::printf("mean_color_variance=%.6g\n", stats.mean_color_variance);
    } else if (*cmp_cmd) {
      tsmlab::RunConfig cfg = load_config(cmp_args);
      auto rows = tsmlab::compare_estimators(cfg, out_of(cmp_args));
      for (const auto& r : rows) {
        std::printf("estimator=%s final_loss=%.6g final_distance=%.6g "
                    "mean_grad_norm_tail=%.6g\n",
                    tsmlab::estimator_kind_name(r.kind), r.final_loss,
                    r.final_distance, r.mean_grad_norm_tail);
      }
    }
  } catch (const tsmlab::Error& e) {
    std::fprintf(stderr, "ERROR %s: %s\n",
                 tsmlab::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR internal: %s\n", e.what());
    return 2;
  }
  return 0;
}

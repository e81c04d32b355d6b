// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the score-distillation core: schedules, the
// closed-form mixture denoiser, deterministic transport, the three
// distillation estimators, the splat rasterizer with its adjoint,
// gradient clipping, densification, and the experiment harness.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "tsmlab/clipping.hpp"
#include "tsmlab/config.hpp"
#include "tsmlab/ddim.hpp"
#include "tsmlab/densify.hpp"
#include "tsmlab/error.hpp"
#include "tsmlab/estimators.hpp"
#include "tsmlab/generator.hpp"
#include "tsmlab/harness.hpp"
#include "tsmlab/oracle.hpp"
#include "tsmlab/schedule.hpp"

namespace py = pybind11;
using namespace tsmlab;

namespace {

std::optional<std::filesystem::path> opt_path(
    const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::filesystem::path(*s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Score-distillation laboratory: closed-form mixture denoisers, "
      "deterministic transport, SDS/ISM/TSM estimators, a differentiable "
      "splat rasterizer, clipping, densification, and experiment drivers.";

  // Library errors carry a stable category token; surface both.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg =
          std::string(error_code_name(e.code())) + ": " + e.what();
      PyErr_SetString(PyExc_ValueError, msg.c_str());
    }
  });

  // ----------------------------------------------------------------- schedule
  py::class_<NoiseSchedule>(m, "NoiseSchedule")
      .def_static("linear", &NoiseSchedule::linear, py::arg("steps"),
                  py::arg("beta_start"), py::arg("beta_end"))
      .def_static("from_alpha_bars", &NoiseSchedule::from_alpha_bars,
                  py::arg("alpha_bars"))
      .def_property_readonly("steps", &NoiseSchedule::steps)
      .def("alpha_bar", &NoiseSchedule::alpha_bar, py::arg("t"))
      .def("alpha_bars", &NoiseSchedule::alpha_bars)
      .def("__repr__", [](const NoiseSchedule& s) {
        std::ostringstream o;
        o << "NoiseSchedule(steps=" << s.steps() << ")";
        return o.str();
      });

  py::enum_<WeightKind>(m, "WeightKind")
      .value("Constant", WeightKind::Constant)
      .value("SigmaWeighted", WeightKind::SigmaWeighted);

  m.def("timestep_weight", &timestep_weight, py::arg("kind"),
        py::arg("schedule"), py::arg("t"));

  // ------------------------------------------------------------------- oracle
  py::class_<ConditionLabel>(m, "ConditionLabel")
      .def_static("null", &ConditionLabel::null)
      .def_static("label", &ConditionLabel::label, py::arg("index"))
      .def_property_readonly("is_null", &ConditionLabel::is_null)
      .def_property_readonly(
          "index", [](const ConditionLabel& y) { return y.index(); })
      .def("__eq__", [](ConditionLabel a, ConditionLabel b) { return a == b; })
      .def("__hash__",
           [](ConditionLabel y) {
             return std::hash<int>()(y.is_null() ? -1 : y.index());
           })
      .def("__repr__", [](ConditionLabel y) {
        return y.is_null() ? std::string("ConditionLabel.null()")
                           : "ConditionLabel.label(" +
                                 std::to_string(y.index()) + ")";
      });

  py::class_<MixtureComponent>(m, "MixtureComponent")
      .def(py::init([](double weight, Eigen::VectorXd mean, double variance) {
             return MixtureComponent{weight, std::move(mean), variance};
           }),
           py::arg("weight"), py::arg("mean"), py::arg("variance"))
      .def_readwrite("weight", &MixtureComponent::weight)
      .def_readwrite("mean", &MixtureComponent::mean)
      .def_readwrite("variance", &MixtureComponent::variance);

  py::class_<MixtureSpec>(m, "MixtureSpec")
      .def(py::init<std::vector<MixtureComponent>>(), py::arg("components"))
      .def_property_readonly("dim", &MixtureSpec::dim)
      .def("components", &MixtureSpec::components)
      .def("mean", &MixtureSpec::mean);

  py::class_<DiffusionOracle>(m, "DiffusionOracle")
      .def(py::init<NoiseSchedule, std::map<ConditionLabel, MixtureSpec>>(),
           py::arg("schedule"), py::arg("mixtures"))
      .def_property_readonly("dim", &DiffusionOracle::dim)
      .def("schedule", &DiffusionOracle::schedule,
           py::return_value_policy::reference_internal)
      .def("has_label", &DiffusionOracle::has_label, py::arg("label"))
      .def("mixture", &DiffusionOracle::mixture, py::arg("label"),
           py::return_value_policy::reference_internal)
      .def("epsilon", &DiffusionOracle::epsilon, py::arg("x"), py::arg("t"),
           py::arg("label"))
      .def("epsilon_cfg", &DiffusionOracle::epsilon_cfg, py::arg("x"),
           py::arg("t"), py::arg("label"), py::arg("guidance_scale"));

  // --------------------------------------------------------------- transport
  py::class_<Latent>(m, "Latent")
      .def(py::init([](Eigen::VectorXd values, int t) {
             return Latent{std::move(values), t};
           }),
           py::arg("values"), py::arg("t") = 0)
      .def_readwrite("values", &Latent::values)
      .def_readwrite("t", &Latent::t)
      .def("__repr__", [](const Latent& x) {
        std::ostringstream o;
        o << "Latent(dim=" << x.values.size() << ", t=" << x.t << ")";
        return o.str();
      });

  py::enum_<FormulaMode>(m, "FormulaMode")
      .value("DdimStandard", FormulaMode::DdimStandard)
      .value("SigmaSwapped", FormulaMode::SigmaSwapped);

  m.def("denoise_with", &denoise_with, py::arg("schedule"), py::arg("x"),
        py::arg("t_to"), py::arg("eps"));
  m.def("invert_with", &invert_with, py::arg("schedule"), py::arg("x"),
        py::arg("t_to"), py::arg("eps"), py::arg("mode"));
  m.def("denoise_step", &denoise_step, py::arg("oracle"), py::arg("x"),
        py::arg("t_prev"), py::arg("label"));
  m.def("invert_step", &invert_step, py::arg("oracle"), py::arg("x"),
        py::arg("t_next"), py::arg("mode"));
  m.def("invert_trajectory", &invert_trajectory, py::arg("oracle"),
        py::arg("x0"), py::arg("s"), py::arg("delta_S"), py::arg("mode"));

  py::class_<JumpResult>(m, "JumpResult")
      .def_readonly("latent", &JumpResult::latent)
      .def_readonly("eps", &JumpResult::eps);

  m.def("jump", &jump, py::arg("oracle"), py::arg("xs"), py::arg("target"),
        py::arg("mode"));
  m.def("mu_timestep", &mu_timestep, py::arg("gamma"), py::arg("s"),
        py::arg("t"));

  // --------------------------------------------------------------- estimators
  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("delta_T", &EstimatorConfig::delta_T)
      .def_readwrite("delta_S", &EstimatorConfig::delta_S)
      .def_readwrite("gamma", &EstimatorConfig::gamma)
      .def_readwrite("t_min", &EstimatorConfig::t_min)
      .def_readwrite("t_max", &EstimatorConfig::t_max)
      .def_readwrite("guidance_scale", &EstimatorConfig::guidance_scale)
      .def_readwrite("mode", &EstimatorConfig::mode)
      .def_readwrite("weight", &EstimatorConfig::weight);

  m.def("resolve", &resolve, py::arg("config"), py::arg("schedule"));
  m.def("conditional_term", &conditional_term, py::arg("oracle"), py::arg("x"),
        py::arg("t"), py::arg("label"), py::arg("guidance_scale"));

  py::class_<LatentGradient>(m, "LatentGradient")
      .def_readonly("values", &LatentGradient::values)
      .def_readonly("loss_proxy", &LatentGradient::loss_proxy)
      .def_readonly("t", &LatentGradient::t)
      .def_readonly("s", &LatentGradient::s)
      .def_readonly("mu", &LatentGradient::mu);

  m.def("sds_gradient", &sds_gradient, py::arg("oracle"), py::arg("x0"),
        py::arg("label"), py::arg("config"), py::arg("seed"));
  m.def("ism_gradient", &ism_gradient, py::arg("oracle"), py::arg("x0"),
        py::arg("label"), py::arg("config"), py::arg("seed"));
  m.def("tsm_gradient", &tsm_gradient, py::arg("oracle"), py::arg("x0"),
        py::arg("label"), py::arg("config"), py::arg("seed"));

  py::class_<GapMetrics>(m, "GapMetrics")
      .def_readonly("gap_ism", &GapMetrics::gap_ism)
      .def_readonly("gap_tsm", &GapMetrics::gap_tsm)
      .def_readonly("t", &GapMetrics::t)
      .def_readonly("s", &GapMetrics::s)
      .def_readonly("mu", &GapMetrics::mu);

  m.def("gap_metrics", &gap_metrics, py::arg("oracle"), py::arg("x0"),
        py::arg("config"), py::arg("seed"));

  // ---------------------------------------------------------------- generator
  py::class_<Splat>(m, "Splat")
      .def(py::init<>())
      .def_static("from_values", &Splat::from_values, py::arg("pos"),
                  py::arg("scale"), py::arg("rot"), py::arg("color"),
                  py::arg("opacity"), py::arg("z"))
      .def_readwrite("pos", &Splat::pos)
      .def_readwrite("log_scale", &Splat::log_scale)
      .def_readwrite("rot", &Splat::rot)
      .def_readwrite("color", &Splat::color)
      .def_readwrite("opacity_logit", &Splat::opacity_logit)
      .def_readwrite("z", &Splat::z)
      .def("scale", &Splat::scale)
      .def("opacity", &Splat::opacity);

  py::class_<SplatScene>(m, "SplatScene")
      .def(py::init<>())
      .def_readwrite("splats", &SplatScene::splats)
      .def("__len__", &SplatScene::size)
      .def("save", &SplatScene::save, py::arg("path"))
      .def_static("load", &SplatScene::load, py::arg("path"));

  py::class_<ViewParam>(m, "ViewParam")
      .def(py::init<>())
      .def_readwrite("linear", &ViewParam::linear)
      .def_readwrite("offset", &ViewParam::offset);

  py::class_<RenderOutput>(m, "RenderOutput")
      .def_readonly("width", &RenderOutput::width)
      .def_readonly("height", &RenderOutput::height)
      .def_readonly("color", &RenderOutput::color)
      .def_readonly("depth", &RenderOutput::depth)
      .def_readonly("alpha", &RenderOutput::alpha)
      .def_readonly("scale_hint", &RenderOutput::scale_hint);

  m.def("render", &render, py::arg("scene"), py::arg("view"), py::arg("width"),
        py::arg("height"));

  py::class_<RenderGrad>(m, "RenderGrad")
      .def(py::init<>())
      .def_readwrite("color", &RenderGrad::color)
      .def_readwrite("depth", &RenderGrad::depth)
      .def_readwrite("alpha", &RenderGrad::alpha);

  py::class_<SplatGrad>(m, "SplatGrad")
      .def_readonly("pos", &SplatGrad::pos)
      .def_readonly("log_scale", &SplatGrad::log_scale)
      .def_readonly("rot", &SplatGrad::rot)
      .def_readonly("color", &SplatGrad::color)
      .def_readonly("opacity_logit", &SplatGrad::opacity_logit)
      .def_readonly("z", &SplatGrad::z)
      .def_readonly("view_pos_norm", &SplatGrad::view_pos_norm);

  m.def("render_backward", &render_backward, py::arg("scene"), py::arg("view"),
        py::arg("width"), py::arg("height"), py::arg("grad"));
  m.def("identity_generator", &identity_generator, py::arg("theta"));

  // ----------------------------------------------------------------- clipping
  py::class_<DepthClipConfig>(m, "DepthClipConfig")
      .def(py::init<>())
      .def_readwrite("rate", &DepthClipConfig::rate)
      .def_readwrite("scale_fallback", &DepthClipConfig::scale_fallback)
      .def_readwrite("scale_map", &DepthClipConfig::scale_map)
      .def_readwrite("passthrough_normal", &DepthClipConfig::passthrough_normal);

  py::class_<ColorClipConfig>(m, "ColorClipConfig")
      .def(py::init<>())
      .def_readwrite("max_norm", &ColorClipConfig::max_norm);

  m.def("clip_depth", &clip_depth, py::arg("grad"), py::arg("config"));
  m.def("clip_color", &clip_color, py::arg("grad"), py::arg("config"));

  // -------------------------------------------------------------- densification
  py::class_<DensifyConfig>(m, "DensifyConfig")
      .def(py::init<>())
      .def_readwrite("tau_pos", &DensifyConfig::tau_pos)
      .def_readwrite("sigma_split", &DensifyConfig::sigma_split)
      .def_readwrite("tau_opacity", &DensifyConfig::tau_opacity)
      .def_readwrite("start_iter", &DensifyConfig::start_iter)
      .def_readwrite("end_iter", &DensifyConfig::end_iter)
      .def_readwrite("interval", &DensifyConfig::interval)
      .def_readwrite("split_scale_divisor", &DensifyConfig::split_scale_divisor)
      .def_readwrite("split_offset", &DensifyConfig::split_offset);

  py::class_<DensifyStats>(m, "DensifyStats")
      .def(py::init<std::size_t>(), py::arg("count") = 0)
      .def("resize", &DensifyStats::resize, py::arg("count"))
      .def("accumulate", &DensifyStats::accumulate, py::arg("splat"),
           py::arg("view_pos_norm"))
      .def("reset", &DensifyStats::reset)
      .def("__len__", &DensifyStats::size)
      .def("events", &DensifyStats::events, py::arg("splat"))
      .def("average", &DensifyStats::average, py::arg("splat"));

  py::enum_<DensifyOp>(m, "DensifyOp")
      .value("Clone", DensifyOp::Clone)
      .value("Split", DensifyOp::Split)
      .value("Prune", DensifyOp::Prune);

  py::class_<DensifyAction>(m, "DensifyAction")
      .def_readonly("op", &DensifyAction::op)
      .def_readonly("splat", &DensifyAction::splat);

  py::class_<DensifyCounts>(m, "DensifyCounts")
      .def_readonly("clones", &DensifyCounts::clones)
      .def_readonly("splits", &DensifyCounts::splits)
      .def_readonly("prunes", &DensifyCounts::prunes);

  m.def("densify_decide", &densify_decide, py::arg("stats"), py::arg("scene"),
        py::arg("config"), py::arg("iter"));
  m.def("densify_apply", &densify_apply, py::arg("scene"), py::arg("actions"),
        py::arg("config"));

  // ------------------------------------------------------------------- config
  py::enum_<EstimatorKind>(m, "EstimatorKind")
      .value("Sds", EstimatorKind::Sds)
      .value("Ism", EstimatorKind::Ism)
      .value("Tsm", EstimatorKind::Tsm);

  py::enum_<GeneratorKind>(m, "GeneratorKind")
      .value("Identity", GeneratorKind::Identity)
      .value("Splats", GeneratorKind::Splats);

  py::enum_<OptimizerKind>(m, "OptimizerKind")
      .value("Gd", OptimizerKind::Gd)
      .value("Adam", OptimizerKind::Adam);

  py::class_<KeyValues>(m, "KeyValues")
      .def_static("parse_file", &KeyValues::parse_file, py::arg("path"))
      .def_static("parse_text", &KeyValues::parse_text, py::arg("text"))
      .def("has", &KeyValues::has, py::arg("key"))
      .def("all", &KeyValues::all, py::arg("key"))
      .def("get_string", &KeyValues::get_string, py::arg("key"),
           py::arg("fallback"))
      .def("get_double", &KeyValues::get_double, py::arg("key"),
           py::arg("fallback"))
      .def("get_int", &KeyValues::get_int, py::arg("key"), py::arg("fallback"))
      .def("get_bool", &KeyValues::get_bool, py::arg("key"),
           py::arg("fallback"))
      .def("set", &KeyValues::set, py::arg("key"), py::arg("value"));

  py::class_<LatentLayout>(m, "LatentLayout")
      .def_readonly("width", &LatentLayout::width)
      .def_readonly("height", &LatentLayout::height)
      .def_readonly("channels", &LatentLayout::channels)
      .def_readonly("include_depth", &LatentLayout::include_depth)
      .def("color_dim", &LatentLayout::color_dim)
      .def("dim", &LatentLayout::dim);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("from_kv", &RunConfig::from_kv, py::arg("kv"))
      .def_static("from_file", &RunConfig::from_file, py::arg("path"))
      .def_static(
          "from_text",
          [](const std::string& text) {
            return RunConfig::from_kv(KeyValues::parse_text(text));
          },
          py::arg("text"))
      .def("layout", &RunConfig::layout)
      .def("validate", &RunConfig::validate)
      .def_readwrite("steps", &RunConfig::steps)
      .def_readwrite("beta_start", &RunConfig::beta_start)
      .def_readwrite("beta_end", &RunConfig::beta_end)
      .def_readwrite("condition", &RunConfig::condition)
      .def_readwrite("kind", &RunConfig::kind)
      .def_readwrite("estimator", &RunConfig::estimator)
      .def_readwrite("generator", &RunConfig::generator)
      .def_readwrite("width", &RunConfig::width)
      .def_readwrite("height", &RunConfig::height)
      .def_readwrite("channels", &RunConfig::channels)
      .def_readwrite("include_depth", &RunConfig::include_depth)
      .def_readwrite("identity_init", &RunConfig::identity_init)
      .def_readwrite("splat_count", &RunConfig::splat_count)
      .def_readwrite("splat_scale", &RunConfig::splat_scale)
      .def_readwrite("splat_opacity", &RunConfig::splat_opacity)
      .def_readwrite("splat_color", &RunConfig::splat_color)
      .def_readwrite("splat_z", &RunConfig::splat_z)
      .def_readwrite("init_seed", &RunConfig::init_seed)
      .def_readwrite("view_count", &RunConfig::view_count)
      .def_readwrite("view_jitter", &RunConfig::view_jitter)
      .def_readwrite("optimizer", &RunConfig::optimizer)
      .def_readwrite("step_size", &RunConfig::step_size)
      .def_readwrite("iterations", &RunConfig::iterations)
      .def_readwrite("adam_beta1", &RunConfig::adam_beta1)
      .def_readwrite("adam_beta2", &RunConfig::adam_beta2)
      .def_readwrite("adam_eps", &RunConfig::adam_eps)
      .def_readwrite("pos_rate", &RunConfig::pos_rate)
      .def_readwrite("shape_rate", &RunConfig::shape_rate)
      .def_readwrite("z_rate", &RunConfig::z_rate)
      .def_readwrite("clip_color_on", &RunConfig::clip_color_on)
      .def_readwrite("clip_color_norm", &RunConfig::clip_color_norm)
      .def_readwrite("clip_depth_on", &RunConfig::clip_depth_on)
      .def_readwrite("clip_depth_rate", &RunConfig::clip_depth_rate)
      .def_readwrite("clip_depth_scale", &RunConfig::clip_depth_scale)
      .def_readwrite("clip_depth_use_render_scale",
                     &RunConfig::clip_depth_use_render_scale)
      .def_readwrite("clip_passthrough", &RunConfig::clip_passthrough)
      .def_readwrite("densify_on", &RunConfig::densify_on)
      .def_readwrite("densify", &RunConfig::densify)
      .def_readwrite("depth_noise_scale", &RunConfig::depth_noise_scale)
      .def_readwrite("depth_noise_df", &RunConfig::depth_noise_df)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("log_interval", &RunConfig::log_interval)
      .def_readwrite("image_interval", &RunConfig::image_interval)
      .def_property(
          "mixtures",
          [](const RunConfig& c) { return c.mixtures; },
          [](RunConfig& c, std::map<int, std::vector<ComponentSpec>> v) {
            c.mixtures = std::move(v);
          });

  py::class_<MeanSpec> mean_spec(m, "MeanSpec");
  py::enum_<MeanSpec::Kind>(mean_spec, "Kind")
      .value("Fill", MeanSpec::Kind::Fill)
      .value("Inline", MeanSpec::Kind::Inline)
      .value("Image", MeanSpec::Kind::Image);
  mean_spec.def(py::init<>())
      .def_readwrite("kind", &MeanSpec::kind)
      .def_readwrite("values", &MeanSpec::values)
      .def_readwrite("image_path", &MeanSpec::image_path);

  py::class_<ComponentSpec>(m, "ComponentSpec")
      .def(py::init<>())
      .def_readwrite("weight", &ComponentSpec::weight)
      .def_readwrite("mean", &ComponentSpec::mean)
      .def_readwrite("variance", &ComponentSpec::variance);

  m.def("resolve_mean", &resolve_mean, py::arg("spec"), py::arg("layout"));
  m.def("estimator_kind_name", &estimator_kind_name, py::arg("kind"));
  m.def("parse_estimator_kind", &parse_estimator_kind, py::arg("name"));

  // ------------------------------------------------------------------ harness
  m.def("splitmix64", &splitmix64, py::arg("x"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"),
        py::arg("index"));

  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("iter", &MetricsRow::iter)
      .def_readonly("loss", &MetricsRow::loss)
      .def_readonly("grad_norm", &MetricsRow::grad_norm)
      .def_readonly("gap_ism", &MetricsRow::gap_ism)
      .def_readonly("gap_tsm", &MetricsRow::gap_tsm)
      .def_readonly("color_grad_pre", &MetricsRow::color_grad_pre)
      .def_readonly("color_grad_post", &MetricsRow::color_grad_post)
      .def_readonly("depth_grad_pre", &MetricsRow::depth_grad_pre)
      .def_readonly("depth_grad_post", &MetricsRow::depth_grad_post)
      .def_readonly("splats", &MetricsRow::splats)
      .def_readonly("clones", &MetricsRow::clones)
      .def_readonly("splits", &MetricsRow::splits)
      .def_readonly("prunes", &MetricsRow::prunes)
      .def_readonly("distance", &MetricsRow::distance);

  m.def("metrics_csv_header", &metrics_csv_header);
  m.def("metrics_csv_row", &metrics_csv_row, py::arg("row"));

  py::class_<RunOutputs>(m, "RunOutputs")
      .def_readonly("metrics", &RunOutputs::metrics)
      .def_readonly("theta", &RunOutputs::theta)
      .def_readonly("scene", &RunOutputs::scene)
      .def_readonly("final_render", &RunOutputs::final_render)
      .def_readonly("initial_distance", &RunOutputs::initial_distance)
      .def_readonly("final_distance", &RunOutputs::final_distance)
      .def_readonly("densify_totals", &RunOutputs::densify_totals);

  m.def(
      "run_distill",
      [](const RunConfig& config, const std::optional<std::string>& out_dir) {
        return run_distill(config, opt_path(out_dir));
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  py::class_<TrajectoryRow>(m, "TrajectoryRow")
      .def_readonly("sample", &TrajectoryRow::sample)
      .def_readonly("t", &TrajectoryRow::t)
      .def_readonly("s", &TrajectoryRow::s)
      .def_readonly("mu", &TrajectoryRow::mu)
      .def_readonly("gap_ism", &TrajectoryRow::gap_ism)
      .def_readonly("gap_tsm", &TrajectoryRow::gap_tsm);

  py::class_<TrajectoryStats>(m, "TrajectoryStats")
      .def_readonly("rows", &TrajectoryStats::rows)
      .def_readonly("wins", &TrajectoryStats::wins)
      .def_readonly("ism_positive", &TrajectoryStats::ism_positive)
      .def_readonly("wins_when_positive", &TrajectoryStats::wins_when_positive)
      .def_readonly("win_rate", &TrajectoryStats::win_rate);

  m.def(
      "analyze_trajectory",
      [](const RunConfig& config, int samples,
         const std::optional<std::string>& out_dir) {
        return analyze_trajectory(config, samples, opt_path(out_dir));
      },
      py::arg("config"), py::arg("samples"), py::arg("out_dir") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  py::class_<GammaRow>(m, "GammaRow")
      .def_readonly("gamma", &GammaRow::gamma)
      .def_readonly("final_loss", &GammaRow::final_loss)
      .def_readonly("final_distance", &GammaRow::final_distance)
      .def_readonly("mean_grad_norm_tail", &GammaRow::mean_grad_norm_tail);

  m.def(
      "ablate_gamma",
      [](const RunConfig& config, const std::vector<double>& gammas,
         const std::optional<std::string>& out_dir) {
        return ablate_gamma(config, gammas, opt_path(out_dir));
      },
      py::arg("config"), py::arg("gammas"), py::arg("out_dir") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  py::class_<SeedRow>(m, "SeedRow")
      .def_readonly("seed", &SeedRow::seed)
      .def_readonly("final_loss", &SeedRow::final_loss)
      .def_readonly("final_distance", &SeedRow::final_distance);

  py::class_<ConsistencyStats>(m, "ConsistencyStats")
      .def_readonly("rows", &ConsistencyStats::rows)
      .def_readonly("width", &ConsistencyStats::width)
      .def_readonly("height", &ConsistencyStats::height)
      .def_readonly("variance_map", &ConsistencyStats::variance_map)
      .def_readonly("mean_color_variance",
                    &ConsistencyStats::mean_color_variance);

  m.def(
      "seed_consistency",
      [](const RunConfig& config, const std::vector<std::uint64_t>& seeds,
         const std::optional<std::string>& out_dir) {
        return seed_consistency(config, seeds, opt_path(out_dir));
      },
      py::arg("config"), py::arg("seeds"), py::arg("out_dir") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  py::class_<CompareRow>(m, "CompareRow")
      .def_readonly("kind", &CompareRow::kind)
      .def_readonly("final_loss", &CompareRow::final_loss)
      .def_readonly("final_distance", &CompareRow::final_distance)
      .def_readonly("mean_grad_norm_tail", &CompareRow::mean_grad_norm_tail);

  m.def(
      "compare_estimators",
      [](const RunConfig& config, const std::optional<std::string>& out_dir) {
        return compare_estimators(config, opt_path(out_dir));
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());
}

#pragma once

#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "json.hpp"
#include "qoja/eval/metrics.hpp"
#include "qoja/fitter/fit.hpp"
#include "qoja/oja/energy.hpp"
#include "qoja/rng.hpp"
#include "qoja/synth/generator.hpp"

namespace qoja {

struct PriorTrainingConfig {
  int training_frames = 2000;
  double jitter_px = 3.0;
  std::string normalization = "silhouette_centroid_sqrt_area";
  int shape_pose_sequences = 40;  // simulated walks for the fitter's shape/pose prior
  int shape_pose_frames = 50;
  double shape_pose_shrinkage = 1e-2;

  NormalizationKind kind() const {
    if (normalization == "identity") return NormalizationKind::kIdentity;
    if (normalization == to_string(NormalizationKind::kSilhouette)) return NormalizationKind::kSilhouette;
    throw ValidationError("prior.normalization must be 'identity' or '" + to_string(NormalizationKind::kSilhouette) +
                          "'");
  }
};

struct DatasetConfig {
  int sequences = 10;
  int frames = 30;
  bool heatmaps = false;
};

/// Everything a command reads. Every field has a default.
struct RunConfig {
  std::uint64_t seed = 2024;
  std::string workspace;  // empty: QOJA_WORKSPACE or the current directory
  DatasetConfig dataset;
  SynthConfig synth;
  PriorTrainingConfig prior;
  OjaConfig oja;
  FitConfig fit;
  PckConfig pck;

  void validate() const {
    if (dataset.sequences < 1 || dataset.frames < 1) throw ValidationError("dataset: need at least one sequence and frame");
    if (synth.width < 1 || synth.height < 1) throw ValidationError("synth: image size must be positive");
    if (!(synth.heatmap_sigma > 0.0) || !(synth.min_depth > 0.0)) throw ValidationError("synth: sigma and depth must be positive");
    if (synth.camera.min_distance > synth.camera.max_distance || !(synth.camera.min_distance > 0.0))
      throw ValidationError("synth.camera: distance range is invalid");
    synth.corruption.validate();
    if (prior.training_frames < 2 || !(prior.jitter_px >= 0.0) || prior.shape_pose_sequences < 1 ||
        prior.shape_pose_frames < 1 || !(prior.shape_pose_shrinkage > 0.0))
      throw ValidationError("prior: values out of range");
    (void)prior.kind();
    oja.validate();
    fit.validate();
    pck.validate();
  }
};

namespace detail {

/// Walks a config in one direction or the other: with an input document,
/// known keys are read and unknown keys rejected; the output always receives
/// the resolved values.
class ConfigBinder {
 public:
  ConfigBinder(const nlohmann::json* in, nlohmann::json* out, std::string path)
      : in_(in), out_(out), path_(std::move(path)) {
    if (in_ && !in_->is_object()) throw ValidationError("config: '" + display() + "' must be an object");
  }

  template <typename T>
  void field(const std::string& key, T& value) {
    seen_.insert(key);
    if (in_ && in_->contains(key)) {
      try {
        value = in_->at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ValidationError("config: '" + join(key) + "' has the wrong type");
      }
    }
    (*out_)[key] = value;
  }

  void section(const std::string& key, const std::function<void(ConfigBinder&)>& body) {
    seen_.insert(key);
    (*out_)[key] = nlohmann::json::object();
    const nlohmann::json* sub = in_ && in_->contains(key) ? &in_->at(key) : nullptr;
    ConfigBinder b(sub, &(*out_)[key], join(key));
    body(b);
    b.finish();
  }

  void finish() const {
    if (!in_) return;
    for (auto it = in_->begin(); it != in_->end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError("config: unknown key '" + join(it.key()) + "'");
  }

  const nlohmann::json* input() const { return in_; }
  nlohmann::json& output() { return *out_; }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const nlohmann::json* in_;
  nlohmann::json* out_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void bind_stage(ConfigBinder& b, StageWeights& s) {
  b.field("joints", s.joints);
  b.field("prior", s.prior);
  b.field("lim", s.lim);
  b.field("sil", s.sil);
  b.field("temp", s.temp);
  b.field("max_iterations", s.max_iterations);
}

inline void bind(ConfigBinder& b, RunConfig& c) {
  b.field("seed", c.seed);
  b.field("workspace", c.workspace);
  b.section("dataset", [&](ConfigBinder& d) {
    d.field("sequences", c.dataset.sequences);
    d.field("frames", c.dataset.frames);
    d.field("heatmaps", c.dataset.heatmaps);
  });
  b.section("synth", [&](ConfigBinder& s) {
    auto& y = c.synth;
    s.field("width", y.width);
    s.field("height", y.height);
    s.field("focal", y.focal);
    s.field("frame_fill", y.frame_fill);
    s.field("heatmap_sigma", y.heatmap_sigma);
    s.field("min_depth", y.min_depth);
    s.section("camera", [&](ConfigBinder& k) {
      k.field("min_distance", y.camera.min_distance);
      k.field("max_distance", y.camera.max_distance);
      k.field("min_elevation", y.camera.min_elevation);
      k.field("max_elevation", y.camera.max_elevation);
      k.field("look_at_cube", y.camera.look_at_cube);
      k.field("up_sigma", y.camera.up_sigma);
    });
    s.section("shape_pose", [&](ConfigBinder& k) {
      k.field("global_scale_sigma", y.shape_pose.global_scale_sigma);
      k.field("length_sigma", y.shape_pose.length_sigma);
      k.field("radius_sigma", y.shape_pose.radius_sigma);
      k.field("pose_sigma_scale", y.shape_pose.pose_sigma_scale);
    });
    s.section("animation", [&](ConfigBinder& k) {
      k.field("ou_rate", y.animation.ou_rate);
      k.field("step_sigma", y.animation.step_sigma);
      k.field("forward_speed", y.animation.forward_speed);
      k.field("max_joint_step_px", y.animation.max_joint_step_px);
    });
  });
  b.section("corruption", [&](ConfigBinder& k) {
    auto& y = c.synth.corruption;
    k.field("alias_swap_prob", y.alias_swap_prob);
    k.field("dropout_prob", y.dropout_prob);
    k.field("jitter_sigma", y.jitter_sigma);
    k.field("spurious_rate", y.spurious_rate);
    k.field("confidence_noise", y.confidence_noise);
    k.field("alias_confidence", y.alias_confidence);
    k.field("spurious_confidence", y.spurious_confidence);
  });
  b.section("prior", [&](ConfigBinder& k) {
    k.field("training_frames", c.prior.training_frames);
    k.field("jitter_px", c.prior.jitter_px);
    k.field("normalization", c.prior.normalization);
    k.field("shape_pose_sequences", c.prior.shape_pose_sequences);
    k.field("shape_pose_frames", c.prior.shape_pose_frames);
    k.field("shape_pose_shrinkage", c.prior.shape_pose_shrinkage);
  });
  b.section("oja", [&](ConfigBinder& k) {
    auto& o = c.oja;
    k.field("lambda_conf", o.lambda_conf);
    k.field("lambda_null", o.lambda_null);
    k.field("lambda_temp", o.lambda_temp);
    k.field("tau", o.tau);
    k.field("window", o.window);
    k.field("w_cov_sil", o.w_cov_sil);
    k.field("cov_sil_normalize", o.cov_sil_normalize);
    k.field("w_cov_bone", o.w_cov_bone);
    k.field("dilation_radius", o.dilation_radius);
    k.field("cov_max_distance", o.cov_max_distance);
    k.field("mat_max_points", o.mat_max_points);
    k.field("qp_restarts", o.qp_restarts);
    k.field("qp_max_entries", o.qp_max_entries);
    k.field("ga_population", o.ga_population);
    k.field("ga_seeded", o.ga_seeded);
    k.field("ga_generations", o.ga_generations);
    k.field("ga_mutation_prob", o.ga_mutation_prob);
    k.field("ga_max_mutations", o.ga_max_mutations);
  });
  b.section("fit", [&](ConfigBinder& k) {
    auto& f = c.fit;
    static const char* names[4] = {"stage1", "stage2", "stage3", "stage4"};
    for (int s = 0; s < 4; ++s) k.section(names[s], [&](ConfigBinder& st) { bind_stage(st, f.stages[s]); });
    k.field("joints_scale", f.joints_scale);
    k.field("prior_scale", f.prior_scale);
    k.field("lim_scale", f.lim_scale);
    k.field("sil_scale", f.sil_scale);
    k.field("temp_scale", f.temp_scale);
    k.field("temp_pose_weight", f.temp_pose_weight);
    k.field("sharpness", f.sharpness);
    k.field("init_yaw_candidates", f.init_yaw_candidates);
    k.section("dogleg", [&](ConfigBinder& d) {
      auto& g = f.dogleg;
      d.field("initial_radius", g.initial_radius);
      d.field("shrink", g.shrink);
      d.field("grow", g.grow);
      d.field("max_radius", g.max_radius);
      d.field("min_radius", g.min_radius);
      d.field("gradient_tolerance", g.gradient_tolerance);
      d.field("step_tolerance", g.step_tolerance);
      d.field("max_iterations", g.max_iterations);
      d.field("fd_step", g.fd_step);
    });
  });
  b.section("pck", [&](ConfigBinder& k) {
    k.field("alpha", c.pck.alpha);
    k.field("frame_stride", c.pck.frame_stride);
  });
}

}  // namespace detail

/// Resolved document for a config (every field present).
inline nlohmann::json to_json(const RunConfig& c) {
  RunConfig copy = c;
  nlohmann::json out = nlohmann::json::object();
  detail::ConfigBinder b(nullptr, &out, "");
  detail::bind(b, copy);
  return out;
}

/// Defaults overridden by the keys present in `j`; unknown keys throw.
inline RunConfig config_from(const nlohmann::json& j) {
  RunConfig c;
  nlohmann::json out = nlohmann::json::object();
  detail::ConfigBinder b(&j, &out, "");
  detail::bind(b, c);
  b.finish();
  c.validate();
  return c;
}

/// 16 hex digits of FNV-1a over the canonical resolved document.
inline std::string config_hash(const RunConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

}  // namespace qoja

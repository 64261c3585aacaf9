#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qoja/common.hpp"
#include "qoja/core/camera.hpp"
#include "qoja/core/model.hpp"
#include "qoja/image.hpp"
#include "qoja/proposals.hpp"
#include "qoja/rng.hpp"
#include "qoja/synth/rasterize.hpp"

namespace qoja {

// ---------------------------------------------------------------- cameras

struct CameraSamplingConfig {
  double min_distance = 1.0;  // meters
  double max_distance = 20.0;
  double min_elevation = 0.0;  // radians above the horizontal
  double max_elevation = kPi / 2;
  double look_at_cube = 1.0;  // edge of the cube around the animal centre
  double up_sigma = 0.1;      // radians of noise on the up vector
};

struct SampledCamera {
  PositionParams world_to_camera;
  Vec3 eye = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double azimuth = 0.0;
  double elevation = 0.0;
  double distance = 0.0;
};

inline SampledCamera sample_camera(Rng& rng, const Vec3& center, const CameraSamplingConfig& cfg = {}) {
  SampledCamera c;
  c.azimuth = rng.uniform(0.0, 2.0 * kPi);
  c.distance = rng.uniform(cfg.min_distance, cfg.max_distance);
  c.elevation = rng.uniform(cfg.min_elevation, cfg.max_elevation);
  c.eye = center + c.distance * Vec3(std::cos(c.elevation) * std::cos(c.azimuth), std::sin(c.elevation),
                                     std::cos(c.elevation) * std::sin(c.azimuth));
  const double h = 0.5 * cfg.look_at_cube;
  c.target = center + Vec3(rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h));
  const Vec3 noise(rng.normal(), rng.normal(), rng.normal());
  const Vec3 up = (Vec3::UnitY() + cfg.up_sigma * noise).normalized();
  c.world_to_camera = look_at(c.eye, c.target, up);
  return c;
}

// ---------------------------------------------------------------- shape and pose

struct ShapeParams {
  Eigen::VectorXd lengths;
  Eigen::VectorXd radii;

  bool operator==(const ShapeParams& o) const { return lengths == o.lengths && radii == o.radii; }
};

inline ShapeParams shape_of(const ProxyQuadruped& m) { return {m.bone_lengths, m.capsule_radii}; }

inline ProxyQuadruped with_shape(ProxyQuadruped m, const ShapeParams& s) {
  m.bone_lengths = s.lengths;
  m.capsule_radii = s.radii;
  return m;
}

/// Bone whose child joint is the left/right mirror of this bone's child, or
/// the bone itself.
inline std::vector<int> mirror_bones(const ProxyQuadruped& m) {
  std::vector<int> mirror(m.bone_count());
  auto swap_side = [](std::string n) {
    for (auto [from, to] : {std::pair{"left", "right"}, std::pair{"right", "left"}}) {
      auto pos = n.find(from);
      if (pos != std::string::npos) return n.replace(pos, std::string(from).size(), to);
    }
    return n;
  };
  for (int b = 0; b < m.bone_count(); ++b) {
    const int child = m.topology.bone_child[b];
    const int other = m.schema.index_of(swap_side(m.schema.joint_names[child]));
    mirror[b] = other >= 0 ? m.topology.parent_bone[other] : b;
  }
  return mirror;
}

struct ShapePoseSamplingConfig {
  double global_scale_sigma = 0.08;  // log-normal, whole animal
  double length_sigma = 0.05;        // log-normal, per bone
  double radius_sigma = 0.10;
  double pose_sigma_scale = 0.5;  // std as a fraction of a quarter of the joint range
};

inline double truncated_normal(Rng& rng, double mean, double sigma, double lo, double hi) {
  if (sigma <= 0.0) return std::clamp(mean, lo, hi);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.normal(mean, sigma);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(mean, lo, hi);
}

/// Random pose inside the template's limits and a log-normal shape draw
/// around the template's bone sizes. Mirrored bones share their draw.
inline std::pair<PoseParams, ShapeParams> sample_pose_shape(Rng& rng, const ProxyQuadruped& model,
                                                            const PoseParams& limits,
                                                            const ShapePoseSamplingConfig& cfg = {}) {
  PoseParams pose = limits;
  for (int i = 0; i < pose.theta.size(); ++i) {
    const double sigma = cfg.pose_sigma_scale * 0.25 * (limits.theta_max[i] - limits.theta_min[i]);
    pose.theta[i] = truncated_normal(rng, 0.0, sigma, limits.theta_min[i], limits.theta_max[i]);
  }
  const int B = model.bone_count();
  const auto mirror = mirror_bones(model);
  const double global = cfg.global_scale_sigma * rng.normal();
  Eigen::VectorXd len_noise(B), rad_noise(B);
  for (int b = 0; b < B; ++b) {
    len_noise[b] = cfg.length_sigma * rng.normal();
    rad_noise[b] = cfg.radius_sigma * rng.normal();
  }
  ShapeParams shape{model.bone_lengths, model.capsule_radii};
  for (int b = 0; b < B; ++b) {
    const int src = std::min(b, mirror[b]);
    shape.lengths[b] = model.bone_lengths[b] * std::exp(global + len_noise[src]);
    shape.radii[b] = model.capsule_radii[b] * std::exp(global + rad_noise[src]);
  }
  return {pose, shape};
}

// ---------------------------------------------------------------- ground truth

struct GroundTruthFrame {
  Eigen::VectorXd theta;
  ShapeParams shape;
  PositionParams position;  // model to camera frame
  CameraModel camera;
  Points3 joints3d;  // camera frame
  Points2 joints2d;
  Silhouette silhouette;
  std::vector<bool> visibility;
};

/// A joint is visible when it projects inside the image and the ray to its
/// centre is not blocked by a capsule it does not belong to.
inline std::vector<bool> joint_visibility(const ProxyQuadruped& model, const CameraModel& cam,
                                          const Points3& joints3d, const Points2& joints2d) {
  const int J = model.joint_count();
  const auto caps = capsules_from(model, joints3d);
  std::vector<bool> vis(J, false);
  for (int j = 0; j < J; ++j) {
    if (!cam.in_image(joints2d.col(j))) continue;
    double own_radius = 0.0;
    for (int b = 0; b < model.bone_count(); ++b)
      if (model.topology.bone_child[b] == j || model.topology.bone_parent[b] == j)
        own_radius = std::max(own_radius, model.capsule_radii[b]);
    const Vec3 dir = joints3d.col(j).normalized();
    const double depth = joints3d(2, j);
    bool blocked = false;
    for (int b = 0; b < model.bone_count() && !blocked; ++b) {
      if (model.topology.bone_child[b] == j || model.topology.bone_parent[b] == j) continue;
      const RayHit hit = ray_axis_distance(dir, caps[b]);
      blocked = hit.distance <= caps[b].radius && hit.depth + caps[b].radius < depth - own_radius;
    }
    vis[j] = !blocked;
  }
  return vis;
}

inline GroundTruthFrame make_truth_frame(const ProxyQuadruped& template_model, const ShapeParams& shape,
                                         const CameraModel& camera, const Eigen::VectorXd& theta,
                                         const PositionParams& position) {
  const ProxyQuadruped model = with_shape(template_model, shape);
  GroundTruthFrame f;
  f.theta = theta;
  f.shape = shape;
  f.position = position;
  f.camera = camera;
  f.joints3d = forward_kinematics(model, theta, position);
  f.joints2d = project_joints(camera, f.joints3d, &model.schema.joint_names);
  f.silhouette = rasterize_capsules(camera, capsules_from(model, f.joints3d));
  f.visibility = joint_visibility(model, camera, f.joints3d, f.joints2d);
  return f;
}

// ---------------------------------------------------------------- animation

struct AnimationConfig {
  double ou_rate = 0.1;            // pull back toward the initial pose per frame
  double step_sigma = 0.04;        // radians per frame
  double forward_speed = 0.02;     // meters per frame along the body axis
  double max_joint_step_px = 8.0;  // bound on any joint's image motion per frame
};

struct FrameState {
  Eigen::VectorXd theta;
  PositionParams position;
};

/// Ornstein-Uhlenbeck walk in pose space plus forward root motion. Steps
/// that would move a joint more than the pixel bound are shortened.
inline std::vector<FrameState> animate_sequence(Rng& rng, int frames, const ProxyQuadruped& model,
                                                const PoseParams& limits, const FrameState& initial,
                                                const CameraModel& camera, const AnimationConfig& cfg = {}) {
  if (frames < 1) throw ArgumentError("animate_sequence: frame count must be at least 1");
  std::vector<FrameState> out{initial};
  out.reserve(frames);
  auto project = [&](const FrameState& s) {
    const Points3 p = forward_kinematics(model, s.theta, s.position);
    Points2 q(2, p.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      q.col(j) = p(2, j) > 1e-6 ? camera.project(p.col(j)) : Vec2(1e9, 1e9);
    return q;
  };
  Points2 prev_px = project(initial);
  for (int t = 1; t < frames; ++t) {
    const FrameState& prev = out.back();
    Eigen::VectorXd delta(prev.theta.size());
    for (int i = 0; i < delta.size(); ++i)
      delta[i] = cfg.ou_rate * (initial.theta[i] - prev.theta[i]) + cfg.step_sigma * rng.normal();
    const Vec3 forward = prev.position.rotation * Vec3(cfg.forward_speed, 0.0, 0.0);
    FrameState next;
    Points2 next_px;
    double alpha = 1.0;
    for (int attempt = 0; attempt < 30; ++attempt, alpha *= 0.5) {
      next = prev;
      next.theta = (prev.theta + alpha * delta).cwiseMax(limits.theta_min).cwiseMin(limits.theta_max);
      next.position.translation = prev.position.translation + alpha * forward;
      next_px = project(next);
      if ((next_px - prev_px).colwise().norm().maxCoeff() <= cfg.max_joint_step_px) break;
    }
    if ((next_px - prev_px).colwise().norm().maxCoeff() > cfg.max_joint_step_px) {
      next = prev;
      next_px = prev_px;
    }
    out.push_back(next);
    prev_px = next_px;
  }
  return out;
}

// ---------------------------------------------------------------- heatmaps

using HeatmapStack = std::vector<FloatImage>;

/// Per-joint blend of unit-peak Gaussians at the joint and its aliases,
/// sampled at pixel centres.
inline HeatmapStack encode_heatmaps(const Points2& joints2d, const Eigen::MatrixXd& alias_weights, double sigma,
                                    int width, int height) {
  if (!(sigma > 0.0)) throw ArgumentError("encode_heatmaps: sigma must be positive");
  const int J = static_cast<int>(joints2d.cols());
  std::vector<FloatImage> unimodal;
  unimodal.reserve(J);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < J; ++j) {
    FloatImage g(width, height, 0.0);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        g(x, y) = std::exp(-((Vec2(x + 0.5, y + 0.5) - joints2d.col(j)).squaredNorm()) * inv);
    unimodal.push_back(std::move(g));
  }
  HeatmapStack out;
  out.reserve(J);
  for (int j = 0; j < J; ++j) {
    FloatImage h(width, height, 0.0);
    for (int k = 0; k < J; ++k) {
      const double w = alias_weights(j, k);
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] += w * unimodal[k].data()[i];
    }
    out.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------- corruption

/// Failure modes of a silhouette-only joint detector.
struct CorruptionConfig {
  double alias_swap_prob = 0.2;
  double dropout_prob = 0.05;
  double jitter_sigma = 3.0;     // pixels
  double spurious_rate = 0.5;    // expected extra proposals per joint
  double confidence_noise = 0.5; // std of the log-confidence perturbation
  double alias_confidence = 0.3; // base confidence of the alias mode on leg joints
  double spurious_confidence = 0.15;

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(alias_swap_prob) || !prob(dropout_prob) || !(jitter_sigma >= 0.0) || !(spurious_rate >= 0.0) ||
        !(confidence_noise >= 0.0) || !prob(alias_confidence) || !prob(spurious_confidence))
      throw ValidationError("corruption config out of range");
  }
};

struct CorruptionTrace {
  std::vector<bool> swapped;   // leg joints whose top mode moved to the alias
  std::vector<bool> dropped;   // joints without a true-location proposal
};

inline ProposalSet corrupt_proposals(const GroundTruthFrame& truth, const SkeletonSchema& schema,
                                     const CorruptionConfig& cfg, Rng& rng, CorruptionTrace* trace = nullptr) {
  cfg.validate();
  const int J = schema.joint_count();
  const CameraModel& cam = truth.camera;
  auto clamp_conf = [](double c) { return std::clamp(c, 1e-6, 1.0); };
  ProposalSet out;
  out.joints.resize(J);
  if (trace) {
    trace->swapped.assign(J, false);
    trace->dropped.assign(J, false);
  }
  for (int j = 0; j < J; ++j) {
    // Fixed draw order per joint so streams do not depend on branch outcomes.
    const double n_conf = rng.normal(), n_alias_conf = rng.normal();
    const Vec2 jit_true(rng.normal(), rng.normal()), jit_alias(rng.normal(), rng.normal());
    const bool drop = rng.bernoulli(cfg.dropout_prob);
    const bool swap = rng.bernoulli(cfg.alias_swap_prob);
    const int spurious = rng.poisson(cfg.spurious_rate);

    auto& props = out.joints[j];
    const Vec2 gt = truth.joints2d.col(j);
    const bool in_image = cam.in_image(gt);
    double true_conf = clamp_conf(std::exp(-std::abs(cfg.confidence_noise * n_conf)));
    int true_idx = -1, alias_idx = -1;
    if (in_image && !drop) {
      true_idx = static_cast<int>(props.size());
      props.push_back({gt + cfg.jitter_sigma * jit_true, true_conf});
    }
    const int alias = schema.is_leg_joint(j) ? schema.alias_of(j) : -1;
    if (alias >= 0 && cfg.alias_confidence > 0.0) {
      const Vec2 apos = truth.joints2d.col(alias);
      if (cam.in_image(apos)) {
        alias_idx = static_cast<int>(props.size());
        props.push_back({apos + cfg.jitter_sigma * jit_alias,
                         clamp_conf(cfg.alias_confidence * std::exp(cfg.confidence_noise * n_alias_conf))});
      }
    }
    if (swap && alias >= 0) {
      if (true_idx >= 0 && alias_idx >= 0) {
        std::swap(props[true_idx].confidence, props[alias_idx].confidence);
      } else if (alias_idx >= 0) {
        props[alias_idx].confidence = true_conf;
      }
      if (trace) trace->swapped[j] = alias_idx >= 0;
    }
    if (trace) trace->dropped[j] = true_idx < 0;
    for (int s = 0; s < spurious; ++s) {
      const Vec2 p(rng.uniform(0.0, cam.width), rng.uniform(0.0, cam.height));
      props.push_back({p, clamp_conf(cfg.spurious_confidence * std::exp(cfg.confidence_noise * rng.normal()))});
    }
  }
  return out;
}

// ---------------------------------------------------------------- sequences

struct SynthConfig {
  int width = 256;
  int height = 256;
  double focal = 500.0;     // used when frame_fill <= 0
  double frame_fill = 0.7;  // fraction of the half-image spanned by the farthest joint
  double heatmap_sigma = 4.0;
  double min_depth = 0.5;   // every joint at least this far in front of the camera
  CameraSamplingConfig camera;
  ShapePoseSamplingConfig shape_pose;
  AnimationConfig animation;
  CorruptionConfig corruption;
};

/// Focal length that frames the given camera-frame points.
inline double framing_focal(const Points3& pts, const SynthConfig& cfg) {
  double mx = 1e-9, my = 1e-9;
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    mx = std::max(mx, std::abs(pts(0, j) / pts(2, j)));
    my = std::max(my, std::abs(pts(1, j) / pts(2, j)));
  }
  return cfg.frame_fill * std::min(0.5 * cfg.width / mx, 0.5 * cfg.height / my);
}

struct PlacedAnimal {
  CameraModel camera;
  PositionParams position;  // model to camera frame
  SampledCamera sampled;
};

/// Samples cameras around a posed animal until every joint is comfortably in
/// front of the lens and the eye is outside the body.
inline PlacedAnimal place_camera(Rng& rng, const ProxyQuadruped& model, const Eigen::VectorXd& theta,
                                 const SynthConfig& cfg) {
  const Points3 world = forward_kinematics(model, theta, PositionParams{});
  const Vec3 center = world.rowwise().mean();
  const auto caps = capsules_from(model, world);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    SampledCamera sc = sample_camera(rng, center, cfg.camera);
    bool inside = false;
    for (const auto& c : caps) {
      const Vec3 v = c.b - c.a;
      const double s = std::clamp((sc.eye - c.a).dot(v) / v.squaredNorm(), 0.0, 1.0);
      inside = inside || (sc.eye - (c.a + s * v)).norm() < c.radius + 0.2;
    }
    if (inside) continue;
    PlacedAnimal placed;
    placed.sampled = sc;
    placed.position = sc.world_to_camera;
    const Points3 cam_pts = forward_kinematics(model, theta, placed.position);
    if (cam_pts.row(2).minCoeff() < cfg.min_depth) continue;
    placed.camera.width = cfg.width;
    placed.camera.height = cfg.height;
    placed.camera.cx = 0.5 * cfg.width;
    placed.camera.cy = 0.5 * cfg.height;
    placed.camera.focal = cfg.frame_fill > 0.0 ? framing_focal(cam_pts, cfg) : cfg.focal;
    return placed;
  }
  throw GeometryError("could not place a camera in front of the animal");
}

/// One independent random frame (shape, pose, camera).
inline GroundTruthFrame random_frame(Rng& rng, const ProxyQuadruped& model, const PoseParams& limits,
                                     const SynthConfig& cfg) {
  auto [pose, shape] = sample_pose_shape(rng, model, limits, cfg.shape_pose);
  const ProxyQuadruped shaped = with_shape(model, shape);
  const PlacedAnimal placed = place_camera(rng, shaped, pose.theta, cfg);
  return make_truth_frame(model, shape, placed.camera, pose.theta, placed.position);
}

struct SyntheticSequence {
  std::vector<GroundTruthFrame> frames;
  std::vector<ProposalSet> proposals;
};

/// Ground truth and corrupted proposals for one sequence. Each frame's
/// corruption stream depends only on (seed, sequence, frame).
inline SyntheticSequence generate_sequence(std::uint64_t seed, int sequence_index, int frames,
                                           const ProxyQuadruped& model, const PoseParams& limits,
                                           const SynthConfig& cfg) {
  Rng rng(derive_seed(seed, "sequence", static_cast<std::uint64_t>(sequence_index)));
  auto [pose, shape] = sample_pose_shape(rng, model, limits, cfg.shape_pose);
  const ProxyQuadruped shaped = with_shape(model, shape);
  const PlacedAnimal placed = place_camera(rng, shaped, pose.theta, cfg);
  const auto states =
      animate_sequence(rng, frames, shaped, limits, FrameState{pose.theta, placed.position}, placed.camera,
                       cfg.animation);
  SyntheticSequence seq;
  for (int t = 0; t < frames; ++t) {
    seq.frames.push_back(make_truth_frame(model, shape, placed.camera, states[t].theta, states[t].position));
    Rng frame_rng(derive_seed(seed, "corrupt", (static_cast<std::uint64_t>(sequence_index) << 20) + t));
    seq.proposals.push_back(corrupt_proposals(seq.frames.back(), model.schema, cfg.corruption, frame_rng));
  }
  return seq;
}

}  // namespace qoja

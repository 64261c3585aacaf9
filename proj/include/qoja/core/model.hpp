#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "qoja/common.hpp"
#include "qoja/core/rotation.hpp"
#include "qoja/core/schema.hpp"

namespace qoja {

/// Tree structure derived once from a schema: traversal order, parent links
/// and where each joint's rotation lives in the pose vector.
struct Topology {
  std::vector<int> parent;        // -1 at the root
  std::vector<int> order;         // parents before children
  std::vector<int> parent_bone;   // bone linking joint to its parent, -1 at root
  std::vector<int> bone_child;    // child joint of each bone
  std::vector<int> bone_parent;   // parent joint of each bone
  std::vector<int> pose_slot;     // first of 3 angles, -1 for root and leaves
  std::vector<int> pose_joints;   // joints that own angles, increasing index

  int pose_size() const { return 3 * static_cast<int>(pose_joints.size()); }

  static Topology from(const SkeletonSchema& s) {
    Topology t;
    const int J = s.joint_count();
    t.parent = parent_array(s);
    t.parent_bone.assign(J, -1);
    t.bone_child.resize(s.bones.size());
    t.bone_parent.resize(s.bones.size());
    for (int b = 0; b < s.bone_count(); ++b) {
      auto [x, y] = s.bones[b];
      const int child = t.parent[y] == x ? y : x;
      t.bone_child[b] = child;
      t.bone_parent[b] = t.parent[child];
      t.parent_bone[child] = b;
    }
    std::vector<int> queue{0};
    for (std::size_t i = 0; i < queue.size(); ++i) {
      t.order.push_back(queue[i]);
      for (int j = 0; j < J; ++j)
        if (t.parent[j] == queue[i]) queue.push_back(j);
    }
    std::vector<int> children(J, 0);
    for (int j = 1; j < J; ++j)
      if (t.parent[j] >= 0) ++children[t.parent[j]];
    t.pose_slot.assign(J, -1);
    for (int j = 1; j < J; ++j) {
      if (children[j] > 0) {
        t.pose_slot[j] = t.pose_size();
        t.pose_joints.push_back(j);
      }
    }
    return t;
  }
};

/// Articulated capsule skeleton. Bones follow the schema's bone order.
struct ProxyQuadruped {
  SkeletonSchema schema;
  Topology topology;
  Eigen::VectorXd bone_lengths;   // meters
  Eigen::VectorXd capsule_radii;  // meters
  std::vector<Vec3> rest_directions;

  int joint_count() const { return schema.joint_count(); }
  int bone_count() const { return schema.bone_count(); }

  void validate() const {
    const int B = bone_count();
    if (bone_lengths.size() != B || capsule_radii.size() != B ||
        static_cast<int>(rest_directions.size()) != B)
      throw ValidationError("proxy model: per-bone arrays must match the bone count");
    for (int b = 0; b < B; ++b) {
      if (!(bone_lengths[b] > 0.0) || !(capsule_radii[b] > 0.0))
        throw ValidationError("proxy model: bone " + std::to_string(b) + " has a non-positive size");
      if (std::abs(rest_directions[b].norm() - 1.0) > 1e-9)
        throw ValidationError("proxy model: rest direction " + std::to_string(b) + " is not unit length");
    }
  }
};

struct PoseParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_min;
  Eigen::VectorXd theta_max;

  bool within_limits() const {
    return ((theta.array() >= theta_min.array()) && (theta.array() <= theta_max.array())).all();
  }
};

struct PositionParams {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();

  void validate() const {
    if (std::abs(rotation.norm() - 1.0) > 1e-9)
      throw ValidationError("position rotation quaternion is not unit length");
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// (this ∘ other): apply other first.
  PositionParams compose(const PositionParams& other) const {
    PositionParams r;
    r.rotation = (rotation * other.rotation).normalized();
    r.translation = rotation * other.translation + translation;
    return r;
  }

  PositionParams inverse() const {
    PositionParams r;
    r.rotation = rotation.conjugate();
    r.translation = -(r.rotation * translation);
    return r;
  }
};

/// Default quadruped, ~1.5 m nose to tail.
inline ProxyQuadruped default_quadruped() {
  using namespace joints;
  ProxyQuadruped m;
  m.schema = default_schema();
  m.topology = Topology::from(m.schema);
  const int B = m.schema.bone_count();
  m.bone_lengths.resize(B);
  m.capsule_radii.resize(B);
  m.rest_directions.resize(B);
  auto set = [&](int child, Vec3 dir, double len, double rad) {
    const int b = m.topology.parent_bone[child];
    m.rest_directions[b] = dir.normalized();
    m.bone_lengths[b] = len;
    m.capsule_radii[b] = rad;
  };
  set(kNeckBase, {1, 0, 0}, 0.45, 0.16);
  set(kTailBase, {-1, 0, 0}, 0.40, 0.15);
  set(kHead, {0.6, 0.8, 0}, 0.38, 0.09);
  set(kNose, {1, -0.3, 0}, 0.22, 0.06);
  set(kTailTip, {-0.7, -0.7, 0}, 0.45, 0.035);
  set(kFrontLeftShoulder, {0, -0.5, -1}, 0.15, 0.09);
  set(kFrontLeftElbow, {0, -1, 0}, 0.33, 0.06);
  set(kFrontLeftPaw, {0, -1, 0}, 0.33, 0.045);
  set(kFrontRightShoulder, {0, -0.5, 1}, 0.15, 0.09);
  set(kFrontRightElbow, {0, -1, 0}, 0.33, 0.06);
  set(kFrontRightPaw, {0, -1, 0}, 0.33, 0.045);
  set(kBackLeftHip, {0, -0.5, -1}, 0.15, 0.10);
  set(kBackLeftKnee, {0, -1, 0.0}, 0.35, 0.065);
  set(kBackLeftPaw, {0, -1, 0}, 0.33, 0.045);
  set(kBackRightHip, {0, -0.5, 1}, 0.15, 0.10);
  set(kBackRightKnee, {0, -1, 0.0}, 0.35, 0.065);
  set(kBackRightPaw, {0, -1, 0}, 0.33, 0.045);
  set(kLeftEar, {-0.3, 0.8, -0.5}, 0.12, 0.03);
  set(kRightEar, {-0.3, 0.8, 0.5}, 0.12, 0.03);
  return m;
}

/// Joint limits for the default taxonomy, zero pose at the centre.
inline PoseParams default_pose(const ProxyQuadruped& m) {
  using namespace joints;
  const int P = m.topology.pose_size();
  PoseParams p;
  p.theta = Eigen::VectorXd::Zero(P);
  p.theta_min.resize(P);
  p.theta_max.resize(P);
  for (int j : m.topology.pose_joints) {
    const int s = m.topology.pose_slot[j];
    Vec3 lo, hi;
    switch (j) {
      case kNeckBase: lo = {-0.2, -0.4, -0.3}; break;
      case kTailBase: lo = {-0.2, -0.3, -0.3}; break;
      case kHead: lo = {-0.3, -0.6, -0.6}; break;
      case kFrontLeftShoulder:
      case kFrontRightShoulder:
      case kBackLeftHip:
      case kBackRightHip: lo = {-0.25, -0.25, -0.7}; break;
      case kFrontLeftElbow:
      case kFrontRightElbow:
        lo = {-0.15, -0.15, -1.0};
        hi = {0.15, 0.15, 0.4};
        break;
      case kBackLeftKnee:
      case kBackRightKnee:
        lo = {-0.15, -0.15, -0.4};
        hi = {0.15, 0.15, 1.0};
        break;
      default: lo = {-0.3, -0.3, -0.3}; break;
    }
    if (j != kFrontLeftElbow && j != kFrontRightElbow && j != kBackLeftKnee && j != kBackRightKnee)
      hi = -lo;
    p.theta_min.segment<3>(s) = lo;
    p.theta_max.segment<3>(s) = hi;
  }
  return p;
}

/// World-space joint positions (3 x J). The root lands on the translation.
inline Points3 forward_kinematics(const ProxyQuadruped& model, const Eigen::VectorXd& theta,
                                  const PositionParams& position) {
  position.validate();
  const auto& topo = model.topology;
  const int J = model.joint_count();
  if (theta.size() != topo.pose_size())
    throw ValidationError("forward_kinematics: pose vector has wrong length");
  Points3 out(3, J);
  std::vector<Mat3> child_frame(J);  // frame applied to bones leaving joint j
  const Mat3 root = position.rotation.toRotationMatrix();
  for (int j : topo.order) {
    const int p = topo.parent[j];
    Mat3 inherited;
    if (p < 0) {
      out.col(j) = position.translation;
      inherited = root;
    } else {
      const int b = topo.parent_bone[j];
      inherited = child_frame[p];
      out.col(j) = out.col(p) + inherited * (model.bone_lengths[b] * model.rest_directions[b]);
    }
    const int s = topo.pose_slot[j];
    child_frame[j] = s < 0 ? inherited : Mat3(inherited * euler_xyz(theta[s], theta[s + 1], theta[s + 2]));
  }
  return out;
}

inline Points3 forward_kinematics(const ProxyQuadruped& model, const PoseParams& pose,
                                  const PositionParams& position) {
  return forward_kinematics(model, pose.theta, position);
}

}  // namespace qoja

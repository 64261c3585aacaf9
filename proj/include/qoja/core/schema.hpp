#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qoja/common.hpp"

namespace qoja {

using Bone = std::pair<int, int>;

/// Joint taxonomy shared by every stage: names, alias blend weights, the
/// kinematic tree and the torso/leg groupings.
struct SkeletonSchema {
  std::vector<std::string> joint_names;
  Eigen::MatrixXd alias_weights;  // J x J, row j blends joint j's heatmap
  std::vector<Bone> bones;        // unordered pairs; stored parent-first
  std::vector<int> torso_joints;
  std::array<std::vector<int>, 4> legs;  // proximal to distal

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int bone_count() const { return static_cast<int>(bones.size()); }

  bool is_leg_joint(int j) const {
    return std::any_of(legs.begin(), legs.end(), [j](const auto& leg) {
      return std::find(leg.begin(), leg.end(), j) != leg.end();
    });
  }

  /// Alias partner of a leg joint, or -1.
  int alias_of(int j) const {
    for (int k = 0; k < joint_count(); ++k)
      if (k != j && alias_weights(j, k) > 0.0) return k;
    return -1;
  }

  /// Leg index of a joint, or -1.
  int leg_of(int j) const {
    for (int l = 0; l < 4; ++l)
      if (std::find(legs[l].begin(), legs[l].end(), j) != legs[l].end()) return l;
    return -1;
  }

  int index_of(const std::string& name) const {
    auto it = std::find(joint_names.begin(), joint_names.end(), name);
    return it == joint_names.end() ? -1 : static_cast<int>(it - joint_names.begin());
  }
};

namespace joints {
// Default 20-joint quadruped taxonomy. X forward, Y up, Z to the right.
enum : int {
  kSpineMid = 0,
  kNeckBase,
  kTailBase,
  kHead,
  kNose,
  kTailTip,
  kFrontLeftShoulder,
  kFrontLeftElbow,
  kFrontLeftPaw,
  kFrontRightShoulder,
  kFrontRightElbow,
  kFrontRightPaw,
  kBackLeftHip,
  kBackLeftKnee,
  kBackLeftPaw,
  kBackRightHip,
  kBackRightKnee,
  kBackRightPaw,
  kLeftEar,
  kRightEar,
  kCount
};
}  // namespace joints

inline SkeletonSchema default_schema() {
  using namespace joints;
  SkeletonSchema s;
  s.joint_names = {"spine_mid",         "neck_base",         "tail_base",       "head",
                   "nose",              "tail_tip",          "front_left_shoulder",
                   "front_left_elbow",  "front_left_paw",    "front_right_shoulder",
                   "front_right_elbow", "front_right_paw",   "back_left_hip",
                   "back_left_knee",    "back_left_paw",     "back_right_hip",
                   "back_right_knee",   "back_right_paw",    "left_ear",
                   "right_ear"};
  s.bones = {{kSpineMid, kNeckBase},
             {kSpineMid, kTailBase},
             {kNeckBase, kHead},
             {kHead, kNose},
             {kTailBase, kTailTip},
             {kNeckBase, kFrontLeftShoulder},
             {kFrontLeftShoulder, kFrontLeftElbow},
             {kFrontLeftElbow, kFrontLeftPaw},
             {kNeckBase, kFrontRightShoulder},
             {kFrontRightShoulder, kFrontRightElbow},
             {kFrontRightElbow, kFrontRightPaw},
             {kTailBase, kBackLeftHip},
             {kBackLeftHip, kBackLeftKnee},
             {kBackLeftKnee, kBackLeftPaw},
             {kTailBase, kBackRightHip},
             {kBackRightHip, kBackRightKnee},
             {kBackRightKnee, kBackRightPaw},
             {kHead, kLeftEar},
             {kHead, kRightEar}};
  s.torso_joints = {kSpineMid, kNeckBase, kTailBase, kHead};
  s.legs = {std::vector<int>{kFrontLeftShoulder, kFrontLeftElbow, kFrontLeftPaw},
            std::vector<int>{kFrontRightShoulder, kFrontRightElbow, kFrontRightPaw},
            std::vector<int>{kBackLeftHip, kBackLeftKnee, kBackLeftPaw},
            std::vector<int>{kBackRightHip, kBackRightKnee, kBackRightPaw}};

  const int J = kCount;
  s.alias_weights = Eigen::MatrixXd::Identity(J, J);
  // Left/right partners share a heatmap mode.
  const std::array<std::pair<int, int>, 2> leg_pairs = {std::pair{0, 1}, std::pair{2, 3}};
  for (auto [a, b] : leg_pairs) {
    for (std::size_t i = 0; i < s.legs[a].size(); ++i) {
      const int l = s.legs[a][i];
      const int r = s.legs[b][i];
      s.alias_weights(l, l) = 0.75;
      s.alias_weights(l, r) = 0.25;
      s.alias_weights(r, r) = 0.75;
      s.alias_weights(r, l) = 0.25;
    }
  }
  return s;
}

/// Parent of every joint when the tree is rooted at joint 0 (root maps to -1).
/// Assumes a valid tree.
inline std::vector<int> parent_array(const SkeletonSchema& s) {
  const int J = s.joint_count();
  std::vector<int> parent(J, -2);
  parent[0] = -1;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (auto [a, b] : s.bones) {
      int other = a == j ? b : (b == j ? a : -1);
      if (other >= 0 && parent[other] == -2) {
        parent[other] = j;
        stack.push_back(other);
      }
    }
  }
  return parent;
}

/// Checks every schema invariant. Returns human-readable violations; empty
/// means valid.
inline std::vector<std::string> validate_schema(const SkeletonSchema& s) {
  std::vector<std::string> out;
  const int J = s.joint_count();
  auto name = [&](int j) { return (j >= 0 && j < J) ? s.joint_names[j] : std::to_string(j); };

  if (J == 0) {
    out.emplace_back("schema has no joints");
    return out;
  }
  if (s.alias_weights.rows() != J || s.alias_weights.cols() != J) {
    out.emplace_back("alias weight matrix is not J x J");
  } else {
    for (int j = 0; j < J; ++j) {
      const auto row = s.alias_weights.row(j);
      if ((row.array() < 0.0).any()) {
        out.push_back("alias weights of joint '" + name(j) + "' contain a negative entry");
        continue;
      }
      const double sum = row.sum();
      if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "alias weights of joint '" << name(j) << "' sum to " << sum << ", expected 1";
        out.push_back(msg.str());
        continue;
      }
      const bool leg = s.is_leg_joint(j);
      int off = 0;
      for (int k = 0; k < J; ++k)
        if (k != j && row(k) != 0.0) ++off;
      if (leg) {
        if (std::abs(row(j) - 0.75) > 1e-12 || off != 1)
          out.push_back("leg joint '" + name(j) + "' must keep 0.75 on itself and 0.25 on one alias");
      } else if (row(j) != 1.0 || off != 0) {
        out.push_back("non-leg joint '" + name(j) + "' must have a unimodal alias row");
      }
    }
  }

  // Tree check by union-find: a repeated connection is a cycle.
  std::vector<int> root(J);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  bool cycle = false;
  bool range_ok = true;
  for (auto [a, b] : s.bones) {
    if (a < 0 || b < 0 || a >= J || b >= J || a == b) {
      range_ok = false;
      continue;
    }
    const int ra = find(a), rb = find(b);
    if (ra == rb)
      cycle = true;
    else
      root[ra] = rb;
  }
  if (!range_ok) out.emplace_back("kinematic tree has an invalid bone");
  if (cycle) out.emplace_back("kinematic tree has cycle");
  int components = 0;
  for (int j = 0; j < J; ++j)
    if (find(j) == j) ++components;
  if (components != 1) out.emplace_back("kinematic tree is disconnected");

  if (s.torso_joints.empty()) out.emplace_back("torso joint set is empty");
  std::vector<int> seen(J, 0);
  for (const auto& leg : s.legs) {
    if (leg.empty()) out.emplace_back("leg has no joints");
    for (int j : leg) {
      if (j < 0 || j >= J) {
        out.push_back("leg joint index " + std::to_string(j) + " out of range");
        continue;
      }
      if (seen[j]++) out.push_back("joint '" + name(j) + "' belongs to more than one leg");
    }
    if (!leg.empty()) {
      const int tip = leg.back();
      if (std::find(s.torso_joints.begin(), s.torso_joints.end(), tip) != s.torso_joints.end())
        out.push_back("torso contains leg extremity '" + name(tip) + "'");
    }
  }
  for (int j : s.torso_joints)
    if (j < 0 || j >= J) out.push_back("torso joint index " + std::to_string(j) + " out of range");
  return out;
}

}  // namespace qoja

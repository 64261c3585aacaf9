#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qoja/core/model.hpp"
#include "qoja/fitter/params.hpp"

namespace qoja {

struct PckConfig {
  double alpha = 0.2;
  int frame_stride = 1;  // 5 mirrors sparse annotation

  void validate() const {
    if (!(alpha > 0.0)) throw ValidationError("pck alpha must be positive");
    if (frame_stride < 1) throw ValidationError("pck frame stride must be at least 1");
  }
};

/// Hits and visible count for one frame; threshold alpha * sqrt(area),
/// inclusive. Null predictions (present = false) are misses.
struct PckCount {
  int hits = 0;
  int visible = 0;
  std::optional<double> percent() const {
    if (visible == 0) return std::nullopt;
    return 100.0 * hits / visible;
  }
};

inline PckCount pck_count(const Points2& pred, const std::vector<bool>& present, const Points2& gt,
                          const std::vector<bool>& visible, double sil_area, const PckConfig& cfg = {}) {
  cfg.validate();
  if (!(sil_area > 0.0)) throw ArgumentError("pck: silhouette area must be positive");
  const double d = cfg.alpha * std::sqrt(sil_area);
  PckCount c;
  for (Eigen::Index j = 0; j < gt.cols(); ++j) {
    if (!visible[j]) continue;
    ++c.visible;
    if (present[j] && (pred.col(j) - gt.col(j)).norm() <= d) ++c.hits;
  }
  return c;
}

inline std::optional<double> pck(const Points2& pred, const std::vector<bool>& present, const Points2& gt,
                                 const std::vector<bool>& visible, double sil_area, const PckConfig& cfg = {}) {
  return pck_count(pred, present, gt, visible, sil_area, cfg).percent();
}

/// Joints plus `samples` evenly spaced interior points per bone.
inline Points3 model_sample_points(const ProxyQuadruped& model, const Points3& joints, int samples = 5) {
  const int J = model.joint_count(), B = model.bone_count();
  Points3 out(3, J + B * samples);
  out.leftCols(J) = joints;
  for (int b = 0; b < B; ++b) {
    const Vec3 a = joints.col(model.topology.bone_parent[b]), c = joints.col(model.topology.bone_child[b]);
    for (int s = 0; s < samples; ++s) {
      const double u = (s + 1.0) / (samples + 1.0);
      out.col(J + b * samples + s) = a + u * (c - a);
    }
  }
  return out;
}

/// Mean distance over joints and bone samples after moving both root
/// joints to the origin (or without alignment).
inline double joint3d_error(const FitParams& pred, const FitParams& gt, const ProxyQuadruped& model,
                            bool root_align = true) {
  const Points3 pj = forward_kinematics(shaped_model(model, pred), pred.theta, pred.position);
  const Points3 gj = forward_kinematics(shaped_model(model, gt), gt.theta, gt.position);
  Points3 ps = model_sample_points(model, pj), gs = model_sample_points(model, gj);
  if (root_align) {
    ps.colwise() -= Vec3(pj.col(0));
    gs.colwise() -= Vec3(gj.col(0));
  }
  return (ps - gs).colwise().norm().mean();
}

}  // namespace qoja

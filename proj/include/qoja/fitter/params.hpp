#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qoja/core/camera.hpp"
#include "qoja/core/model.hpp"
#include "qoja/core/rotation.hpp"
#include "qoja/rng.hpp"
#include "qoja/synth/generator.hpp"

namespace qoja {

/// Position, pose and shape of the proxy. Shape is held in log space so it
/// stays positive under any step.
struct FitParams {
  PositionParams position;
  Eigen::VectorXd theta;
  Eigen::VectorXd log_lengths;
  Eigen::VectorXd log_radii;

  Eigen::VectorXd lengths() const { return log_lengths.array().exp(); }
  Eigen::VectorXd radii() const { return log_radii.array().exp(); }
  ShapeParams shape() const { return {lengths(), radii()}; }

  static FitParams from(const Eigen::VectorXd& theta, const ShapeParams& shape, const PositionParams& position) {
    return {position, theta, shape.lengths.array().log(), shape.radii.array().log()};
  }
};

/// Offsets of each block in the flat optimisation vector.
struct ParamLayout {
  int pose_size = 0;
  int bone_count = 0;

  static constexpr int kTranslation = 0;
  static constexpr int kRotation = 3;
  static constexpr int kTheta = 6;
  int lengths() const { return kTheta + pose_size; }
  int radii() const { return lengths() + bone_count; }
  int size() const { return radii() + bone_count; }

  static ParamLayout of(const ProxyQuadruped& m) { return {m.topology.pose_size(), m.bone_count()}; }
};

/// Flat vector (t, rotation vector, theta, log lengths, log radii).
inline Eigen::VectorXd pack(const FitParams& p, const ParamLayout& L) {
  Eigen::VectorXd x(L.size());
  x.segment<3>(ParamLayout::kTranslation) = p.position.translation;
  x.segment<3>(ParamLayout::kRotation) = rotvec_from_quat(p.position.rotation);
  x.segment(ParamLayout::kTheta, L.pose_size) = p.theta;
  x.segment(L.lengths(), L.bone_count) = p.log_lengths;
  x.segment(L.radii(), L.bone_count) = p.log_radii;
  return x;
}

inline FitParams unpack(const Eigen::VectorXd& x, const ParamLayout& L) {
  FitParams p;
  p.position.translation = x.segment<3>(ParamLayout::kTranslation);
  p.position.rotation = quat_from_rotvec(x.segment<3>(ParamLayout::kRotation)).normalized();
  p.theta = x.segment(ParamLayout::kTheta, L.pose_size);
  p.log_lengths = x.segment(L.lengths(), L.bone_count);
  p.log_radii = x.segment(L.radii(), L.bone_count);
  return p;
}

/// Step in tangent coordinates: the rotation block is a left-multiplied
/// rotation vector, everything else is additive.
inline Eigen::VectorXd retract(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  Eigen::VectorXd out = x + dx;
  const Quat q = quat_from_rotvec(dx.segment<3>(ParamLayout::kRotation)) *
                 quat_from_rotvec(x.segment<3>(ParamLayout::kRotation));
  out.segment<3>(ParamLayout::kRotation) = rotvec_from_quat(q.normalized());
  return out;
}

inline ProxyQuadruped shaped_model(const ProxyQuadruped& model, const FitParams& p) {
  return with_shape(model, p.shape());
}

/// Skew matrix of v: skew(v) * u = v x u.
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Camera-frame joint positions and their derivatives with respect to the
/// tangent coordinates of the flat vector. jac[j] is 3 x N.
struct FkJacobian {
  Points3 joints;
  std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> jac;
};

inline FkJacobian fk_with_jacobian(const ProxyQuadruped& model, const FitParams& p) {
  const ParamLayout L = ParamLayout::of(model);
  const auto& topo = model.topology;
  const int J = model.joint_count();
  const ProxyQuadruped m = shaped_model(model, p);
  FkJacobian out;
  out.joints = forward_kinematics(m, p.theta, p.position);
  out.jac.assign(J, Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, L.size()));

  // Frames as in forward_kinematics: inherited[j] is the frame entering joint j.
  std::vector<Mat3> inherited(J), child(J);
  const Mat3 root = p.position.rotation.toRotationMatrix();
  for (int j : topo.order) {
    const int par = topo.parent[j];
    inherited[j] = par < 0 ? root : child[par];
    const int s = topo.pose_slot[j];
    child[j] = s < 0 ? inherited[j] : Mat3(inherited[j] * euler_xyz(p.theta[s], p.theta[s + 1], p.theta[s + 2]));
  }
  auto descends = [&](int k, int j) {
    for (int a = k; a >= 0; a = topo.parent[a])
      if (a == j) return true;
    return false;
  };
  for (int k = 0; k < J; ++k) {
    const Vec3 pk = out.joints.col(k);
    auto& Jk = out.jac[k];
    Jk.block<3, 3>(0, ParamLayout::kTranslation).setIdentity();
    Jk.block<3, 3>(0, ParamLayout::kRotation) = -skew(pk - p.position.translation);
    for (int j : topo.pose_joints) {
      if (j == k || !descends(k, j)) continue;
      const int s = topo.pose_slot[j];
      const Mat3 rx = Eigen::AngleAxisd(p.theta[s], Vec3::UnitX()).toRotationMatrix();
      const Mat3 ry = Eigen::AngleAxisd(p.theta[s + 1], Vec3::UnitY()).toRotationMatrix();
      const Vec3 axes[3] = {inherited[j] * Vec3::UnitX(), inherited[j] * (rx * Vec3::UnitY()),
                            inherited[j] * (rx * ry * Vec3::UnitZ())};
      const Vec3 arm = pk - out.joints.col(j);
      for (int a = 0; a < 3; ++a) Jk.col(ParamLayout::kTheta + s + a) = axes[a].cross(arm);
    }
    for (int b = 0; b < model.bone_count(); ++b) {
      if (!descends(k, topo.bone_child[b])) continue;
      Jk.col(L.lengths() + b) = out.joints.col(topo.bone_child[b]) - out.joints.col(topo.bone_parent[b]);
    }
  }
  return out;
}

/// d(pixel)/d(camera-frame point).
inline Eigen::Matrix<double, 2, 3> projection_jacobian(const CameraModel& cam, const Vec3& p) {
  Eigen::Matrix<double, 2, 3> d;
  const double iz = 1.0 / p.z();
  d << cam.focal * iz, 0.0, -cam.focal * p.x() * iz * iz, 0.0, cam.focal * iz, -cam.focal * p.y() * iz * iz;
  return d;
}

/// Gaussian with a whitening factor: r = W (x - mean) has |r|^2 equal to the
/// Mahalanobis distance.
struct GaussianPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // shrunk
  Eigen::MatrixXd whitening;   // L^-1 with covariance = L L^T

  double mahalanobis(const Eigen::VectorXd& x) const { return (whitening * (x - mean)).squaredNorm(); }

  void refresh() {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) throw NumericError("prior covariance is not positive definite");
    const Eigen::Index n = covariance.rows();
    whitening = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
  }

  /// Sample mean and covariance with shrinkage toward a scaled identity.
  static GaussianPrior fit(const std::vector<Eigen::VectorXd>& xs, double shrinkage) {
    if (xs.size() < 2) throw ArgumentError("gaussian prior: need at least two samples");
    const Eigen::Index n = xs.front().size();
    GaussianPrior g;
    g.mean = Eigen::VectorXd::Zero(n);
    for (const auto& x : xs) g.mean += x;
    g.mean /= static_cast<double>(xs.size());
    g.covariance = Eigen::MatrixXd::Zero(n, n);
    for (const auto& x : xs) g.covariance += (x - g.mean) * (x - g.mean).transpose();
    g.covariance /= static_cast<double>(xs.size() - 1);
    const double eps = std::max(shrinkage * g.covariance.trace() / static_cast<double>(n), 1e-12);
    g.covariance += eps * Eigen::MatrixXd::Identity(n, n);
    g.refresh();
    return g;
  }
};

/// Priors over shape (log lengths then log radii) and pose.
struct ShapePosePrior {
  GaussianPrior shape;
  GaussianPrior pose;
};

inline Eigen::VectorXd shape_vector(const FitParams& p) {
  Eigen::VectorXd v(p.log_lengths.size() + p.log_radii.size());
  v << p.log_lengths, p.log_radii;
  return v;
}

/// Fits both priors to draws from the synthetic shape and animation
/// distributions.
inline ShapePosePrior fit_shape_pose_prior(std::uint64_t seed, int sequences, int frames_per_sequence,
                                           const ProxyQuadruped& model, const PoseParams& limits,
                                           const ShapePoseSamplingConfig& sampling = {},
                                           const AnimationConfig& animation = {}, double shrinkage = 1e-2) {
  Rng rng(derive_seed(seed, "shape-pose-prior"));
  std::vector<Eigen::VectorXd> shapes, poses;
  for (int s = 0; s < sequences; ++s) {
    auto [pose, shape] = sample_pose_shape(rng, model, limits, sampling);
    Eigen::VectorXd sv(2 * model.bone_count());
    sv << shape.lengths.array().log().matrix(), shape.radii.array().log().matrix();
    shapes.push_back(sv);
    Eigen::VectorXd theta = pose.theta;
    poses.push_back(theta);
    for (int t = 1; t < frames_per_sequence; ++t) {
      Eigen::VectorXd next(theta.size());
      for (Eigen::Index i = 0; i < theta.size(); ++i)
        next[i] = theta[i] + animation.ou_rate * (pose.theta[i] - theta[i]) + animation.step_sigma * rng.normal();
      theta = next.cwiseMax(limits.theta_min).cwiseMin(limits.theta_max);
      poses.push_back(theta);
    }
  }
  return {GaussianPrior::fit(shapes, shrinkage), GaussianPrior::fit(poses, shrinkage)};
}

}  // namespace qoja

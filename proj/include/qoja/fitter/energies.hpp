#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "qoja/core/camera.hpp"
#include "qoja/fitter/dogleg.hpp"
#include "qoja/fitter/params.hpp"
#include "qoja/fitter/render.hpp"
#include "qoja/image.hpp"

namespace qoja {

/// What one frame offers the fitter: a silhouette and the selected 2D joints
/// (null joints have present = false).
struct FitObservation {
  CameraModel camera;
  Silhouette silhouette;
  Points2 joints;
  std::vector<bool> present;

  double area() const { return std::max<double>(1.0, static_cast<double>(silhouette.area())); }
};

// ---------------------------------------------------------------- plain energies

/// Sum of squared differences between two images over `norm`.
inline double silhouette_l2(const FloatImage& a, const FloatImage& b, double norm) {
  if (a.width() != b.width() || a.height() != b.height()) throw ArgumentError("silhouette sizes differ");
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e += sqr(a.data()[i] - b.data()[i]);
  return e / norm;
}

inline FloatImage to_float(const Silhouette& s) {
  FloatImage f(s.width(), s.height(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) f.data()[i] = s.data()[i] ? 1.0 : 0.0;
  return f;
}

inline double e_sil(const CameraModel& cam, const ProxyQuadruped& model, const FitParams& p, const Silhouette& s,
                    double sharpness = 2.0) {
  if (s.width() != cam.width || s.height() != cam.height) throw ArgumentError("e_sil: resolution mismatch");
  return silhouette_l2(to_float(s), soft_render(cam, model, p, sharpness),
                       std::max<double>(1.0, static_cast<double>(s.area())));
}

inline double e_joints(const CameraModel& cam, const ProxyQuadruped& model, const FitParams& p,
                       const Points2& selected, const std::vector<bool>& present, double area) {
  const Points3 joints = forward_kinematics(shaped_model(model, p), p.theta, p.position);
  double e = 0.0;
  for (int j = 0; j < model.joint_count(); ++j) {
    if (!present[j]) continue;
    if (!(joints(2, j) > 0.0)) throw GeometryError("e_joints: joint behind the camera");
    e += (cam.project(joints.col(j)) - selected.col(j)).squaredNorm();
  }
  return e / area;
}

inline double e_lim(const Eigen::VectorXd& theta, const PoseParams& limits) {
  return (theta - limits.theta_max).cwiseMax(0.0).sum() + (limits.theta_min - theta).cwiseMax(0.0).sum();
}

inline double e_prior(const FitParams& p, const ShapePosePrior& prior) {
  return prior.shape.mahalanobis(shape_vector(p)) + prior.pose.mahalanobis(p.theta);
}

/// Translation, geodesic rotation and shape (meters) differences; optional
/// pose difference with its own weight.
inline double e_temp(const FitParams& a, const FitParams& b, double pose_weight = 0.0) {
  const double rot = geodesic_angle(a.position.rotation, b.position.rotation);
  double e = (a.position.translation - b.position.translation).squaredNorm() + rot * rot +
             (a.lengths() - b.lengths()).squaredNorm() + (a.radii() - b.radii()).squaredNorm();
  if (pose_weight > 0.0) e += pose_weight * (a.theta - b.theta).squaredNorm();
  return e;
}

// ---------------------------------------------------------------- residual blocks

/// A residual vector with its Jacobian in the flat tangent coordinates.
struct ResidualBlock {
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
};

inline ResidualBlock joints_residual(const CameraModel& cam, const FkJacobian& fk, const Points2& selected,
                                     const std::vector<bool>& present, double area, bool with_jacobian) {
  const int J = static_cast<int>(present.size());
  int rows = 0;
  for (int j = 0; j < J; ++j) rows += present[j] ? 2 : 0;
  const Eigen::Index N = fk.jac.empty() ? 0 : fk.jac.front().cols();
  ResidualBlock b{Eigen::VectorXd(rows), Eigen::MatrixXd(with_jacobian ? rows : 0, with_jacobian ? N : 0)};
  const double s = 1.0 / std::sqrt(area);
  int row = 0;
  for (int j = 0; j < J; ++j) {
    if (!present[j]) continue;
    const Vec3 p = fk.joints.col(j);
    if (!(p.z() > 1e-9)) {
      b.r.segment<2>(row).setConstant(std::numeric_limits<double>::infinity());
    } else {
      b.r.segment<2>(row) = s * (cam.project(p) - selected.col(j));
      if (with_jacobian) b.J.middleRows<2>(row) = s * projection_jacobian(cam, p) * fk.jac[j];
    }
    row += 2;
  }
  return b;
}

inline ResidualBlock prior_residual(const FitParams& p, const ShapePosePrior& prior, const ParamLayout& L,
                                    bool with_jacobian) {
  const Eigen::Index np = prior.pose.mean.size(), ns = prior.shape.mean.size();
  ResidualBlock b;
  b.r.resize(np + ns);
  b.r.head(np) = prior.pose.whitening * (p.theta - prior.pose.mean);
  b.r.tail(ns) = prior.shape.whitening * (shape_vector(p) - prior.shape.mean);
  if (with_jacobian) {
    b.J = Eigen::MatrixXd::Zero(np + ns, L.size());
    b.J.block(0, ParamLayout::kTheta, np, L.pose_size) = prior.pose.whitening;
    b.J.block(np, L.lengths(), ns, 2 * L.bone_count) = prior.shape.whitening;
  }
  return b;
}

/// Signed hinge per angle; its square is the optimiser's limit penalty.
inline ResidualBlock lim_residual(const Eigen::VectorXd& theta, const PoseParams& limits, const ParamLayout& L,
                                  bool with_jacobian) {
  const Eigen::Index P = theta.size();
  ResidualBlock b;
  b.r = (theta - limits.theta_max).cwiseMax(0.0) - (limits.theta_min - theta).cwiseMax(0.0);
  if (with_jacobian) {
    b.J = Eigen::MatrixXd::Zero(P, L.size());
    for (Eigen::Index i = 0; i < P; ++i)
      if (theta[i] > limits.theta_max[i] || theta[i] < limits.theta_min[i]) b.J(i, ParamLayout::kTheta + i) = 1.0;
  }
  return b;
}

/// Inverse left Jacobian of SO(3) at rotation vector phi.
inline Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 P = skew(phi);
  if (t < 1e-6) return Mat3::Identity() - 0.5 * P + (1.0 / 12.0) * P * P;
  const double c = 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  return Mat3::Identity() - 0.5 * P + c * P * P;
}

inline ResidualBlock temp_residual(const FitParams& p, const FitParams& prev, const ParamLayout& L,
                                   double pose_weight, bool with_jacobian) {
  const int B = L.bone_count, P = L.pose_size;
  const bool pose = pose_weight > 0.0;
  const Eigen::Index rows = 6 + 2 * B + (pose ? P : 0);
  ResidualBlock b;
  b.r.resize(rows);
  b.r.segment<3>(0) = p.position.translation - prev.position.translation;
  const Vec3 phi = rotvec_from_quat(p.position.rotation * prev.position.rotation.conjugate());
  b.r.segment<3>(3) = phi;
  const Eigen::VectorXd len = p.lengths(), rad = p.radii();
  b.r.segment(6, B) = len - prev.lengths();
  b.r.segment(6 + B, B) = rad - prev.radii();
  const double sp = std::sqrt(std::max(0.0, pose_weight));
  if (pose) b.r.tail(P) = sp * (p.theta - prev.theta);
  if (with_jacobian) {
    b.J = Eigen::MatrixXd::Zero(rows, L.size());
    b.J.block<3, 3>(0, ParamLayout::kTranslation).setIdentity();
    b.J.block<3, 3>(3, ParamLayout::kRotation) = so3_left_jacobian_inverse(phi);
    for (int i = 0; i < B; ++i) {
      b.J(6 + i, L.lengths() + i) = len[i];
      b.J(6 + B + i, L.radii() + i) = rad[i];
    }
    if (pose) b.J.block(6 + 2 * B, ParamLayout::kTheta, P, P) = sp * Eigen::MatrixXd::Identity(P, P);
  }
  return b;
}

/// Silhouette residual (S - soft) / sqrt(area) over every pixel. When `lin`
/// is given, adds weight * J^T J and weight * J^T r for the rows with a
/// non-negligible derivative.
inline Eigen::VectorXd sil_residual(const CameraModel& cam, const ProxyQuadruped& model, const FitParams& p,
                                    const FkJacobian& fk, const Silhouette& s, double sharpness, double weight,
                                    Linearization* lin) {
  const ParamLayout L = ParamLayout::of(model);
  const ProxyQuadruped m = shaped_model(model, p);
  const auto caps = capsules_from(m, fk.joints);
  const double band = 20.0 / sharpness;
  const auto sdi = capsule_distance_image(cam, caps, band);
  const double norm = 1.0 / std::sqrt(std::max<double>(1.0, static_cast<double>(s.area())));
  Eigen::VectorXd r(static_cast<Eigen::Index>(cam.width) * cam.height);

  // Per capsule, d(a, b, radius)/d(params): 7 x N.
  std::vector<Eigen::MatrixXd> cap_jac;
  if (lin) {
    cap_jac.resize(caps.size());
    for (int b = 0; b < static_cast<int>(caps.size()); ++b) {
      Eigen::MatrixXd cj = Eigen::MatrixXd::Zero(7, L.size());
      cj.topRows<3>() = fk.jac[m.topology.bone_parent[b]];
      cj.middleRows<3>(3) = fk.jac[m.topology.bone_child[b]];
      cj(6, L.radii() + b) = caps[b].radius;
      cap_jac[b] = std::move(cj);
    }
  }
  Eigen::RowVectorXd row(L.size());
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const Eigen::Index i = static_cast<Eigen::Index>(y) * cam.width + x;
      const double target = s(x, y) ? 1.0 : 0.0;
      const int owner = sdi.owner(x, y);
      if (owner < 0) {
        r[i] = norm * target;
        continue;
      }
      const double occ = sigmoid(-sharpness * sdi.distance(x, y));
      r[i] = norm * (target - occ);
      if (!lin) continue;
      const double slope = occ * (1.0 - occ);
      if (slope < 1e-9) continue;
      // d r / d sd, then central differences of sd in the capsule's 7 numbers.
      const double dr_dsd = norm * sharpness * slope;
      const Vec3 ray = cam.ray({x + 0.5, y + 0.5});
      Eigen::Matrix<double, 1, 7> g;
      Capsule c = caps[owner];
      for (int k = 0; k < 6; ++k) {
        Vec3& v = k < 3 ? c.a : c.b;
        const double h = 1e-6 * std::max(1.0, std::abs(v[k % 3]));
        const double keep = v[k % 3];
        v[k % 3] = keep + h;
        const double up = capsule_signed_distance(ray, c, cam.focal);
        v[k % 3] = keep - h;
        const double dn = capsule_signed_distance(ray, c, cam.focal);
        v[k % 3] = keep;
        g[k] = (up - dn) / (2.0 * h);
      }
      g[6] = -cam.focal / std::max(ray_axis_distance(ray, c).depth, 1e-6);
      row.noalias() = dr_dsd * g * cap_jac[owner];
      lin->jtj.noalias() += weight * row.transpose() * row;
      lin->jtr.noalias() += weight * row.transpose() * r[i];
    }
  return r;
}

}  // namespace qoja

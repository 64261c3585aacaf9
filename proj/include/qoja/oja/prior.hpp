#pragma once

#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qoja/common.hpp"
#include "qoja/image.hpp"

namespace qoja {

/// How image coordinates map into the prior's frame: x' = (x - centre) / scale.
enum class NormalizationKind {
  kSilhouette,  // centre = silhouette centroid, scale = sqrt(area)
  kIdentity,    // raw pixels
};

struct FrameNormalization {
  Vec2 center = Vec2::Zero();
  double scale = 1.0;

  Vec2 apply(const Vec2& x) const { return (x - center) / scale; }
};

inline FrameNormalization normalization_for(NormalizationKind kind, const Silhouette& sil) {
  if (kind == NormalizationKind::kIdentity) return {};
  const double area = static_cast<double>(sil.area());
  if (area <= 0.0) throw GeometryError("prior normalization needs a non-empty silhouette");
  return {sil.centroid(), std::sqrt(area)};
}

inline std::string to_string(NormalizationKind k) {
  return k == NormalizationKind::kIdentity ? "identity" : "silhouette_centroid_sqrt_area";
}

/// Gaussian over stacked 2J joint configurations.
struct SkeletonPrior {
  Eigen::VectorXd mean;        // 2J, (x0, y0, x1, y1, ...)
  Eigen::MatrixXd covariance;  // sample covariance
  Eigen::MatrixXd inverse;     // (covariance + eps I)^-1
  double epsilon = 0.0;
  NormalizationKind normalization = NormalizationKind::kSilhouette;
  std::size_t sample_count = 0;

  int joint_count() const { return static_cast<int>(mean.size() / 2); }

  /// Recomputes the regularised inverse from `covariance`.
  void refresh_inverse() {
    const Eigen::Index n = covariance.rows();
    epsilon = std::max(1e-6 * covariance.trace() / static_cast<double>(n), 1e-12);
    const Eigen::MatrixXd reg = covariance + epsilon * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success) throw NumericError("prior covariance factorisation failed");
    inverse = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    inverse = 0.5 * (inverse + inverse.transpose()).eval();
  }

  /// Full-configuration Mahalanobis distance (all joints present).
  double mahalanobis(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd d = x - mean;
    return d.dot(inverse * d);
  }
};

/// Fits mean and covariance to already-normalised 2J configurations.
inline SkeletonPrior fit_prior(const std::vector<Eigen::VectorXd>& configurations,
                               NormalizationKind normalization = NormalizationKind::kSilhouette) {
  if (configurations.size() < 2) throw ArgumentError("fit_prior: need at least two training frames");
  const Eigen::Index n = configurations.front().size();
  SkeletonPrior prior;
  prior.normalization = normalization;
  prior.sample_count = configurations.size();
  prior.mean = Eigen::VectorXd::Zero(n);
  for (const auto& c : configurations) {
    if (c.size() != n) throw ArgumentError("fit_prior: configurations differ in length");
    prior.mean += c;
  }
  prior.mean /= static_cast<double>(configurations.size());
  prior.covariance = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : configurations) {
    const Eigen::VectorXd d = c - prior.mean;
    prior.covariance.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  prior.covariance = prior.covariance.selfadjointView<Eigen::Lower>();
  prior.covariance /= static_cast<double>(configurations.size() - 1);
  prior.refresh_inverse();
  return prior;
}

/// Stacks a 2 x J joint matrix into the prior's normalised frame.
inline Eigen::VectorXd normalized_configuration(const Points2& joints2d, const FrameNormalization& norm) {
  Eigen::VectorXd v(2 * joints2d.cols());
  for (Eigen::Index j = 0; j < joints2d.cols(); ++j) v.segment<2>(2 * j) = norm.apply(joints2d.col(j));
  return v;
}

}  // namespace qoja

#pragma once

#include <vector>

#include "qoja/oja/prior.hpp"
#include "qoja/synth/generator.hpp"

namespace qoja {

/// Normalised configuration of a ground-truth frame with optional isotropic
/// pixel jitter on every joint.
inline Eigen::VectorXd training_configuration(const GroundTruthFrame& f, NormalizationKind kind, double jitter_px,
                                              Rng& rng) {
  Points2 p = f.joints2d;
  if (jitter_px > 0.0)
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      p(0, j) += jitter_px * rng.normal();
      p(1, j) += jitter_px * rng.normal();
    }
  return normalized_configuration(p, normalization_for(kind, f.silhouette));
}

inline SkeletonPrior fit_prior(const std::vector<GroundTruthFrame>& frames, NormalizationKind kind,
                               double jitter_px, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "prior-jitter"));
  std::vector<Eigen::VectorXd> configs;
  configs.reserve(frames.size());
  for (const auto& f : frames) configs.push_back(training_configuration(f, kind, jitter_px, rng));
  return fit_prior(configs, kind);
}

/// Independent random frames drawn for prior training.
inline std::vector<GroundTruthFrame> training_frames(std::uint64_t seed, int count, const ProxyQuadruped& model,
                                                     const PoseParams& limits, const SynthConfig& cfg) {
  std::vector<GroundTruthFrame> frames;
  frames.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "prior-frame", static_cast<std::uint64_t>(i)));
    frames.push_back(random_frame(rng, model, limits, cfg));
  }
  return frames;
}

}  // namespace qoja

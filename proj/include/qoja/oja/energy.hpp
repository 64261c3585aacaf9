#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qoja/core/schema.hpp"
#include "qoja/image.hpp"
#include "qoja/imageops/distance.hpp"
#include "qoja/imageops/medial_axis.hpp"
#include "qoja/oja/prior.hpp"
#include "qoja/proposals.hpp"

namespace qoja {

struct OjaConfig {
  double lambda_conf = 1.0;
  double lambda_null = 24.0;
  double lambda_temp = 0.02;  // per pixel^2
  double tau = 1.0;           // decay with frame gap
  int window = 2;             // frames coupled on each side
  double w_cov_sil = 10.0;    // multiplier on the scale-free weight when normalised
  bool cov_sil_normalize = true;
  double w_cov_bone = 2.0;
  double dilation_radius = 3.0;  // pixels
  double cov_max_distance = -1.0;  // all-null penalty distance; <= 0 means image diagonal
  std::size_t mat_max_points = 64;
  int qp_restarts = 8;
  std::size_t qp_max_entries = 1'000'000;
  int ga_population = 128;
  int ga_seeded = 32;
  int ga_generations = 1000;
  double ga_mutation_prob = 0.3;
  int ga_max_mutations = 4;

  void validate() const {
    if (!(lambda_conf > 0.0) || !(lambda_null > 0.0) || !(lambda_temp >= 0.0) || !(tau >= 0.0) || window < 1 ||
        !(w_cov_sil >= 0.0) || !(w_cov_bone >= 0.0) || !(dilation_radius >= 0.0) || qp_restarts < 0 ||
        ga_population < 2 || ga_seeded < 0 || ga_seeded > ga_population || ga_generations < 0 ||
        !(ga_mutation_prob >= 0.0 && ga_mutation_prob <= 1.0) || ga_max_mutations < 1)
      throw ValidationError("oja config out of range");
  }
};

/// Per frame, one slot per joint: index into that joint's proposals, or the
/// proposal count for the null choice.
using FrameAssignment = std::vector<int>;
using Assignment = std::vector<FrameAssignment>;

/// One frame of OJA input with everything derived from its silhouette.
struct OjaFrame {
  ProposalSet proposals;
  Silhouette silhouette;
  FrameNormalization normalization;
  MatPointSet mat;
  Silhouette dilated;
  double cov_sil_weight = 0.0;  // effective weight on L_cov-sil
  double max_distance = 0.0;

  int joint_count() const { return proposals.joint_count(); }
  int null_slot(int j) const { return proposals.count(j); }
  bool is_null(int j, int slot) const { return slot >= proposals.count(j); }
  const Vec2& position(int j, int slot) const { return proposals.joints[j][slot].position; }
};

using OjaSequence = std::vector<OjaFrame>;

inline OjaFrame prepare_frame(ProposalSet proposals, Silhouette silhouette, NormalizationKind kind,
                              const OjaConfig& cfg) {
  OjaFrame f;
  f.proposals = std::move(proposals);
  f.silhouette = std::move(silhouette);
  f.normalization = normalization_for(kind, f.silhouette);
  if (f.silhouette.area() > 0) {
    f.mat = medial_axis(f.silhouette, {cfg.mat_max_points});
    f.dilated = dilate(f.silhouette, cfg.dilation_radius);
  } else {
    f.dilated = f.silhouette;
  }
  f.max_distance = cfg.cov_max_distance > 0.0
                       ? cfg.cov_max_distance
                       : std::hypot(double(f.silhouette.width()), double(f.silhouette.height()));
  f.cov_sil_weight = cfg.w_cov_sil;
  if (cfg.cov_sil_normalize && !f.mat.points.empty()) {
    const double s = 0.1 * std::sqrt(static_cast<double>(f.silhouette.area()));
    f.cov_sil_weight = cfg.w_cov_sil / (static_cast<double>(f.mat.points.size()) * s * s * s);
  }
  return f;
}

inline OjaSequence prepare_sequence(const std::vector<ProposalSet>& proposals,
                                    const std::vector<Silhouette>& silhouettes, NormalizationKind kind,
                                    const OjaConfig& cfg) {
  if (proposals.size() != silhouettes.size()) throw ArgumentError("proposal and silhouette counts differ");
  OjaSequence seq;
  seq.reserve(proposals.size());
  for (std::size_t t = 0; t < proposals.size(); ++t)
    seq.push_back(prepare_frame(proposals[t], silhouettes[t], kind, cfg));
  return seq;
}

// ---------------------------------------------------------------- energy terms

/// Mahalanobis form over the selected non-null joints, using the matching
/// entries of the inverse covariance.
inline double l_prior(const FrameAssignment& a, const OjaFrame& f, const SkeletonPrior& prior) {
  double e = 0.0;
  const int J = f.joint_count();
  for (int j = 0; j < J; ++j) {
    if (f.is_null(j, a[j])) continue;
    const Vec2 dj = f.normalization.apply(f.position(j, a[j])) - prior.mean.segment<2>(2 * j);
    for (int k = 0; k < J; ++k) {
      if (f.is_null(k, a[k])) continue;
      const Vec2 dk = f.normalization.apply(f.position(k, a[k])) - prior.mean.segment<2>(2 * k);
      e += dj.dot(prior.inverse.block<2, 2>(2 * j, 2 * k) * dk);
    }
  }
  return e;
}

inline double l_conf(const FrameAssignment& a, const OjaFrame& f, const OjaConfig& cfg) {
  double e = 0.0;
  for (int j = 0; j < f.joint_count(); ++j) {
    if (f.is_null(j, a[j])) {
      e += cfg.lambda_null;
      continue;
    }
    const double y = f.proposals.joints[j][a[j]].confidence;
    if (!(y > 0.0)) throw ValidationError("l_conf: proposal confidence must be positive");
    e += -cfg.lambda_conf * std::log(y);
  }
  return e;
}

inline double temporal_weight(int gap, const OjaConfig& cfg) {
  return cfg.lambda_temp * std::exp(-cfg.tau * std::abs(gap - 1));
}

/// Squared displacement of each joint present in both frames, weighted by
/// the frame gap.
inline double l_temp(const FrameAssignment& a0, const FrameAssignment& a1, const OjaFrame& f0, const OjaFrame& f1,
                     int gap, const OjaConfig& cfg) {
  double e = 0.0;
  for (int j = 0; j < f0.joint_count(); ++j) {
    if (f0.is_null(j, a0[j]) || f1.is_null(j, a1[j])) continue;
    e += (f0.position(j, a0[j]) - f1.position(j, a1[j])).squaredNorm();
  }
  return temporal_weight(gap, cfg) * e;
}

/// Sum over medial-axis samples of the cubed distance to the nearest selected
/// joint. Unweighted.
inline double l_cov_sil(const FrameAssignment& a, const OjaFrame& f) {
  double e = 0.0;
  bool any = false;
  for (int j = 0; j < f.joint_count(); ++j) any = any || !f.is_null(j, a[j]);
  const double max_cube = f.max_distance * f.max_distance * f.max_distance;
  for (const Vec2& z : f.mat.points) {
    if (!any) {
      e += max_cube;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < f.joint_count(); ++j)
      if (!f.is_null(j, a[j])) best = std::min(best, (z - f.position(j, a[j])).squaredNorm());
    e += best * std::sqrt(best);
  }
  return e;
}

/// True when any of the 11 samples along a -> b lies off the mask.
inline bool bone_leaves_mask(const Vec2& a, const Vec2& b, const Silhouette& mask) {
  for (int i = 0; i <= 10; ++i) {
    const Vec2 p = a + (0.1 * i) * (b - a);
    if (!mask.foreground_at(p)) return true;
  }
  return false;
}

/// Number of bones (both ends selected) that cross the dilated silhouette's
/// background.
inline double l_cov_bone(const FrameAssignment& a, const OjaFrame& f, const std::vector<Bone>& bones) {
  double e = 0.0;
  for (auto [j, k] : bones) {
    if (f.is_null(j, a[j]) || f.is_null(k, a[k])) continue;
    if (bone_leaves_mask(f.position(j, a[j]), f.position(k, a[k]), f.dilated)) e += 1.0;
  }
  return e;
}

struct EnergyTerms {
  double prior = 0.0;
  double conf = 0.0;
  double temp = 0.0;
  double cov_sil = 0.0;   // weighted
  double cov_bone = 0.0;  // weighted

  double total() const { return prior + conf + temp + cov_sil + cov_bone; }
};

/// Full objective evaluated directly from the term definitions. Temporal
/// pairs are (t0 < t1) with t1 - t0 <= window.
inline EnergyTerms energy_terms(const Assignment& A, const OjaSequence& seq, const SkeletonPrior& prior,
                                const OjaConfig& cfg, const std::vector<Bone>& bones) {
  EnergyTerms e;
  const int T = static_cast<int>(seq.size());
  for (int t = 0; t < T; ++t) {
    e.prior += l_prior(A[t], seq[t], prior);
    e.conf += l_conf(A[t], seq[t], cfg);
    if (seq[t].cov_sil_weight > 0.0 && !seq[t].mat.points.empty())
      e.cov_sil += seq[t].cov_sil_weight * l_cov_sil(A[t], seq[t]);
    if (cfg.w_cov_bone > 0.0) e.cov_bone += cfg.w_cov_bone * l_cov_bone(A[t], seq[t], bones);
    for (int t1 = t + 1; t1 < T && t1 - t <= cfg.window; ++t1)
      e.temp += l_temp(A[t], A[t1], seq[t], seq[t1], t1 - t, cfg);
  }
  return e;
}

inline double total_energy(const Assignment& A, const OjaSequence& seq, const SkeletonPrior& prior,
                           const OjaConfig& cfg, const std::vector<Bone>& bones) {
  return energy_terms(A, seq, prior, cfg, bones).total();
}

/// Highest-confidence proposal per joint, null where there is none.
inline Assignment max_confidence_assignment(const OjaSequence& seq) {
  Assignment A(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& f = seq[t];
    A[t].resize(f.joint_count());
    for (int j = 0; j < f.joint_count(); ++j) {
      const int b = f.proposals.best(j);
      A[t][j] = b < 0 ? f.null_slot(j) : b;
    }
  }
  return A;
}

inline void validate_assignment(const Assignment& A, const OjaSequence& seq) {
  if (A.size() != seq.size()) throw ValidationError("assignment frame count mismatch");
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (static_cast<int>(A[t].size()) != seq[t].joint_count())
      throw ValidationError("assignment joint count mismatch");
    for (int j = 0; j < seq[t].joint_count(); ++j)
      if (A[t][j] < 0 || A[t][j] > seq[t].null_slot(j)) throw ValidationError("assignment slot out of range");
  }
}

}  // namespace qoja

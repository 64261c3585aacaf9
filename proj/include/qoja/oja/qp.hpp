#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "qoja/oja/energy.hpp"
#include "qoja/rng.hpp"

namespace qoja {

/// Quadratic program over the stacked one-hot selection vector. Blocks are
/// stored sparsely: one dense prior block per frame and, per coupled frame
/// pair, one block per joint (the temporal term only links a joint to
/// itself).
struct QpProblem {
  struct FrameBlock {
    int offset = 0;                 // start of this frame in the stacked vector
    std::vector<int> joint_offset;  // start of each joint within the frame
    Eigen::MatrixXd Q;              // prior block, symmetric
    Eigen::VectorXd c;              // confidence / null costs

    int slots(std::size_t j) const {
      const int end = j + 1 < joint_offset.size() ? joint_offset[j + 1] : static_cast<int>(c.size());
      return end - joint_offset[j];
    }
  };
  struct PairBlock {
    int t0 = 0, t1 = 0;
    std::vector<Eigen::MatrixXd> joint;  // rows: slots of t0, cols: slots of t1
  };

  std::vector<FrameBlock> frames;
  std::vector<PairBlock> pairs;
  std::vector<std::vector<int>> pairs_of_frame;
  int dimension = 0;

  int slot_index(int t, int j, int slot) const { return frames[t].joint_offset[j] + slot; }

  Eigen::VectorXd one_hot(const Assignment& A) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension);
    for (std::size_t t = 0; t < frames.size(); ++t)
      for (std::size_t j = 0; j < A[t].size(); ++j)
        v[frames[t].offset + slot_index(static_cast<int>(t), static_cast<int>(j), A[t][j])] = 1.0;
    return v;
  }

  /// v^T (Q + T) v + c^T v for any vector v.
  double quadratic_form(const Eigen::VectorXd& v) const {
    double e = 0.0;
    for (const auto& f : frames) {
      const auto seg = v.segment(f.offset, f.Q.rows());
      e += seg.dot(f.Q * seg) + f.c.dot(seg);
    }
    for (const auto& p : pairs) {
      const auto& f0 = frames[p.t0];
      const auto& f1 = frames[p.t1];
      for (std::size_t j = 0; j < p.joint.size(); ++j) {
        const auto a = v.segment(f0.offset + f0.joint_offset[j], p.joint[j].rows());
        const auto b = v.segment(f1.offset + f1.joint_offset[j], p.joint[j].cols());
        e += a.dot(p.joint[j] * b);  // both symmetric halves together
      }
    }
    return e;
  }

  /// Energy of a discrete assignment via table lookups.
  double energy(const Assignment& A) const {
    double e = 0.0;
    for (std::size_t t = 0; t < frames.size(); ++t) e += frame_energy(A, static_cast<int>(t));
    for (const auto& p : pairs)
      for (std::size_t j = 0; j < p.joint.size(); ++j) e += p.joint[j](A[p.t0][j], A[p.t1][j]);
    return e;
  }

  double frame_energy(const Assignment& A, int t) const {
    const auto& f = frames[t];
    const auto& a = A[t];
    double e = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const int sj = f.joint_offset[j] + a[j];
      e += f.c[sj];
      for (std::size_t k = 0; k < a.size(); ++k) e += f.Q(sj, f.joint_offset[k] + a[k]);
    }
    return e;
  }

  /// Everything in the energy that depends on (t, j) taking `slot`, with the
  /// rest of A fixed.
  double local_cost(const Assignment& A, int t, int j, int slot) const {
    const auto& f = frames[t];
    const int s = f.joint_offset[j] + slot;
    double e = f.c[s] + f.Q(s, s);
    for (std::size_t k = 0; k < A[t].size(); ++k)
      if (static_cast<int>(k) != j) e += 2.0 * f.Q(s, f.joint_offset[k] + A[t][k]);
    for (int pi : pairs_of_frame[t]) {
      const auto& p = pairs[pi];
      e += p.t0 == t ? p.joint[j](slot, A[p.t1][j]) : p.joint[j](A[p.t0][j], slot);
    }
    return e;
  }

  /// Dense Q-hat (block diagonal).
  Eigen::MatrixXd dense_prior() const {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dimension, dimension);
    for (const auto& f : frames) Q.block(f.offset, f.offset, f.Q.rows(), f.Q.cols()) = f.Q;
    return Q;
  }

  /// Dense T-hat: symmetric, zero diagonal blocks, each coupling split
  /// evenly between its two off-diagonal positions.
  Eigen::MatrixXd dense_temporal() const {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dimension, dimension);
    for (const auto& p : pairs) {
      const auto& f0 = frames[p.t0];
      const auto& f1 = frames[p.t1];
      for (std::size_t j = 0; j < p.joint.size(); ++j) {
        const int r = f0.offset + f0.joint_offset[j], c = f1.offset + f1.joint_offset[j];
        T.block(r, c, p.joint[j].rows(), p.joint[j].cols()) += 0.5 * p.joint[j];
        T.block(c, r, p.joint[j].cols(), p.joint[j].rows()) += 0.5 * p.joint[j].transpose();
      }
    }
    return T;
  }

  Eigen::VectorXd dense_linear() const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dimension);
    for (const auto& f : frames) c.segment(f.offset, f.c.size()) = f.c;
    return c;
  }
};

/// Builds the prior + confidence + temporal QP. Coverage terms are not
/// quadratic and are left out.
inline QpProblem build_qp(const OjaSequence& seq, const SkeletonPrior& prior, const OjaConfig& cfg) {
  QpProblem qp;
  const int T = static_cast<int>(seq.size());
  std::size_t entries = 0;
  auto charge = [&](std::size_t n) {
    entries += n;
    if (entries > cfg.qp_max_entries)
      throw ArgumentError("build_qp: problem exceeds " + std::to_string(cfg.qp_max_entries) + " matrix entries");
  };
  qp.frames.resize(T);
  for (int t = 0; t < T; ++t) {
    const OjaFrame& f = seq[t];
    const int J = f.joint_count();
    if (prior.joint_count() != J) throw ArgumentError("build_qp: prior and proposals disagree on joint count");
    auto& blk = qp.frames[t];
    blk.offset = qp.dimension;
    int n = 0;
    for (int j = 0; j < J; ++j) {
      blk.joint_offset.push_back(n);
      n += f.proposals.count(j) + 1;
    }
    charge(static_cast<std::size_t>(n) * n);
    qp.dimension += n;
    // Normalised residual of every non-null slot; the null slot's row stays 0.
    std::vector<Vec2> resid(n, Vec2::Zero());
    std::vector<bool> real(n, false);
    blk.c = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < J; ++j) {
      for (int p = 0; p < f.proposals.count(j); ++p) {
        const int s = blk.joint_offset[j] + p;
        resid[s] = f.normalization.apply(f.position(j, p)) - prior.mean.segment<2>(2 * j);
        real[s] = true;
        const double y = f.proposals.joints[j][p].confidence;
        if (!(y > 0.0)) throw ValidationError("build_qp: proposal confidence must be positive");
        blk.c[s] = -cfg.lambda_conf * std::log(y);
      }
      blk.c[blk.joint_offset[j] + f.proposals.count(j)] = cfg.lambda_null;
    }
    blk.Q = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < J; ++j)
      for (int p = 0; p <= f.proposals.count(j); ++p) {
        const int s = blk.joint_offset[j] + p;
        if (!real[s]) continue;
        for (int k = 0; k < J; ++k) {
          const Eigen::Matrix2d M = prior.inverse.block<2, 2>(2 * j, 2 * k);
          for (int q = 0; q <= f.proposals.count(k); ++q) {
            const int u = blk.joint_offset[k] + q;
            if (real[u]) blk.Q(s, u) = resid[s].dot(M * resid[u]);
          }
        }
      }
    blk.Q = (0.5 * (blk.Q + blk.Q.transpose())).eval();
  }
  qp.pairs_of_frame.resize(T);
  for (int t0 = 0; t0 < T; ++t0)
    for (int t1 = t0 + 1; t1 < T && t1 - t0 <= cfg.window; ++t1) {
      const double w = temporal_weight(t1 - t0, cfg);
      QpProblem::PairBlock pb;
      pb.t0 = t0;
      pb.t1 = t1;
      const OjaFrame& a = seq[t0];
      const OjaFrame& b = seq[t1];
      for (int j = 0; j < a.joint_count(); ++j) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(a.proposals.count(j) + 1, b.proposals.count(j) + 1);
        charge(static_cast<std::size_t>(M.size()));
        for (int p = 0; p < a.proposals.count(j); ++p)
          for (int q = 0; q < b.proposals.count(j); ++q)
            M(p, q) = w * (a.position(j, p) - b.position(j, q)).squaredNorm();
        pb.joint.push_back(std::move(M));
      }
      qp.pairs_of_frame[t0].push_back(static_cast<int>(qp.pairs.size()));
      qp.pairs_of_frame[t1].push_back(static_cast<int>(qp.pairs.size()));
      qp.pairs.push_back(std::move(pb));
    }
  return qp;
}

struct QpSolution {
  Assignment assignment;
  double energy = 0.0;
  double suggest_energy = 0.0;
  std::vector<double> sweep_energies;  // after each sweep of the winning run
};

/// Iterated conditional modes: each coordinate takes its best slot given the
/// others; only strict improvements are accepted. Returns energies after
/// each sweep.
inline std::vector<double> improve_icm(const QpProblem& qp, Assignment& A) {
  std::vector<double> history{qp.energy(A)};
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t t = 0; t < A.size(); ++t)
      for (std::size_t j = 0; j < A[t].size(); ++j) {
        const int tt = static_cast<int>(t), jj = static_cast<int>(j);
        const int slots = qp.frames[t].slots(j);
        const double current = qp.local_cost(A, tt, jj, A[t][j]);
        double best = current;
        int best_slot = A[t][j];
        for (int s = 0; s < slots; ++s) {
          if (s == A[t][j]) continue;
          const double c = qp.local_cost(A, tt, jj, s);
          if (c < best - 1e-12 * (1.0 + std::abs(best))) {
            best = c;
            best_slot = s;
          }
        }
        if (best_slot != A[t][j]) {
          A[t][j] = best_slot;
          changed = true;
        }
      }
    history.push_back(qp.energy(A));
  }
  return history;
}

inline bool is_local_optimum(const QpProblem& qp, const Assignment& A) {
  for (std::size_t t = 0; t < A.size(); ++t)
    for (std::size_t j = 0; j < A[t].size(); ++j) {
      const int tt = static_cast<int>(t), jj = static_cast<int>(j);
      const double current = qp.local_cost(A, tt, jj, A[t][j]);
      for (int s = 0; s < qp.frames[t].slots(j); ++s)
        if (qp.local_cost(A, tt, jj, s) < current - 1e-9 * (1.0 + std::abs(current))) return false;
    }
  return true;
}

/// Suggest (max confidence) then improve (ICM), plus random restarts.
inline QpSolution solve_qp(const QpProblem& qp, const OjaSequence& seq, const OjaConfig& cfg,
                           std::uint64_t seed = 0) {
  QpSolution best;
  Assignment suggest = max_confidence_assignment(seq);
  best.suggest_energy = qp.energy(suggest);
  best.assignment = suggest;
  best.sweep_energies = improve_icm(qp, best.assignment);
  best.energy = best.sweep_energies.back();
  Rng rng(derive_seed(seed, "qp-restart"));
  for (int r = 0; r < cfg.qp_restarts; ++r) {
    Assignment A = suggest;
    for (std::size_t t = 0; t < A.size(); ++t)
      for (std::size_t j = 0; j < A[t].size(); ++j)
        A[t][j] = static_cast<int>(rng.index(static_cast<std::size_t>(seq[t].null_slot(static_cast<int>(j)) + 1)));
    auto history = improve_icm(qp, A);
    if (history.back() < best.energy) {
      best.energy = history.back();
      best.assignment = std::move(A);
      best.sweep_energies = std::move(history);
    }
  }
  return best;
}

}  // namespace qoja

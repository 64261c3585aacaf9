#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "qoja/oja/energy.hpp"
#include "qoja/oja/qp.hpp"
#include "qoja/rng.hpp"

namespace qoja {

/// Fast evaluator for the full objective: QP tables for the quadratic part,
/// direct evaluation for the coverage terms.
class EnergyModel {
 public:
  EnergyModel(const OjaSequence& seq, const SkeletonPrior& prior, const OjaConfig& cfg, std::vector<Bone> bones)
      : seq_(seq), cfg_(cfg), bones_(std::move(bones)), qp_(build_qp(seq, prior, cfg)) {}

  const QpProblem& qp() const { return qp_; }
  const OjaSequence& sequence() const { return seq_; }

  /// Frame-local part: prior, confidence and weighted coverage.
  double unary(const Assignment& A, int t) const {
    double e = qp_.frame_energy(A, t);
    const OjaFrame& f = seq_[t];
    if (f.cov_sil_weight > 0.0 && !f.mat.points.empty()) e += f.cov_sil_weight * l_cov_sil(A[t], f);
    if (cfg_.w_cov_bone > 0.0) e += cfg_.w_cov_bone * l_cov_bone(A[t], f, bones_);
    return e;
  }

  double temporal(const Assignment& A) const {
    double e = 0.0;
    for (const auto& p : qp_.pairs)
      for (std::size_t j = 0; j < p.joint.size(); ++j) e += p.joint[j](A[p.t0][j], A[p.t1][j]);
    return e;
  }

  double energy(const Assignment& A) const {
    double e = temporal(A);
    for (std::size_t t = 0; t < seq_.size(); ++t) e += unary(A, static_cast<int>(t));
    return e;
  }

 private:
  const OjaSequence& seq_;
  OjaConfig cfg_;
  std::vector<Bone> bones_;
  QpProblem qp_;
};

struct GaResult {
  Assignment assignment;
  double energy = 0.0;
  std::vector<double> best_per_generation;
};

/// Genetic search over per-frame integer genes. The chromosome is the
/// frames' gene vectors laid end to end; crossover cuts it once.
inline GaResult solve_ga(const EnergyModel& model, const OjaConfig& cfg, std::uint64_t seed,
                         const std::vector<Assignment>& seeds = {}) {
  cfg.validate();
  const OjaSequence& seq = model.sequence();
  const int T = static_cast<int>(seq.size());
  std::vector<int> frame_of, joint_of;
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < seq[t].joint_count(); ++j) {
      frame_of.push_back(t);
      joint_of.push_back(j);
    }
  const std::size_t L = frame_of.size();
  Rng rng(derive_seed(seed, "ga"));

  struct Gene {
    Assignment a;
    std::vector<double> unary;
    std::vector<bool> dirty;
    double energy = 0.0;
  };
  auto make_gene = [&](Assignment a) {
    Gene g;
    g.a = std::move(a);
    g.unary.assign(T, 0.0);
    g.dirty.assign(T, true);
    return g;
  };
  auto evaluate = [&](Gene& g) {
    double e = model.temporal(g.a);
    for (int t = 0; t < T; ++t) {
      if (g.dirty[t]) {
        g.unary[t] = model.unary(g.a, t);
        g.dirty[t] = false;
      }
      e += g.unary[t];
    }
    g.energy = e;
  };
  auto random_slot = [&](std::size_t pos) {
    return static_cast<int>(rng.index(static_cast<std::size_t>(seq[frame_of[pos]].null_slot(joint_of[pos]) + 1)));
  };

  const Assignment suggest = max_confidence_assignment(seq);
  std::vector<Gene> pop;
  pop.reserve(cfg.ga_population);
  for (int i = 0; i < cfg.ga_seeded; ++i)
    pop.push_back(make_gene(i < static_cast<int>(seeds.size()) ? seeds[i] : suggest));
  while (static_cast<int>(pop.size()) < cfg.ga_population) {
    Assignment a = suggest;
    for (std::size_t pos = 0; pos < L; ++pos) a[frame_of[pos]][joint_of[pos]] = random_slot(pos);
    pop.push_back(make_gene(std::move(a)));
  }
  for (auto& g : pop) evaluate(g);

  GaResult result;
  auto best_it = std::min_element(pop.begin(), pop.end(), [](const Gene& a, const Gene& b) { return a.energy < b.energy; });
  result.assignment = best_it->a;
  result.energy = best_it->energy;

  const int keep = cfg.ga_population / 2;
  std::vector<int> order(cfg.ga_population);
  for (int gen = 0; gen < cfg.ga_generations; ++gen) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pop[a].energy < pop[b].energy; });
    std::vector<Gene> next;
    next.reserve(cfg.ga_population);
    for (int i = 0; i < keep; ++i) next.push_back(std::move(pop[order[i]]));
    while (static_cast<int>(next.size()) < cfg.ga_population) {
      const int pa = static_cast<int>(rng.index(keep));
      int pb = static_cast<int>(rng.index(keep));
      if (keep > 1)
        while (pb == pa) pb = static_cast<int>(rng.index(keep));
      const Gene& A = next[pa];
      const Gene& B = next[pb];
      Gene child = A;
      if (L > 1) {
        const std::size_t cut = 1 + rng.index(L - 1);  // first gene position taken from B
        for (std::size_t pos = cut; pos < L; ++pos) child.a[frame_of[pos]][joint_of[pos]] = B.a[frame_of[pos]][joint_of[pos]];
        const int cut_frame = frame_of[cut];
        for (int t = cut_frame; t < T; ++t) {
          child.unary[t] = B.unary[t];
          child.dirty[t] = B.dirty[t];
        }
        child.dirty[cut_frame] = true;
      }
      next.push_back(std::move(child));
    }
    // Mutation spares the current best so the elite never degrades.
    for (int i = 1; i < cfg.ga_population; ++i) {
      if (!rng.bernoulli(cfg.ga_mutation_prob)) continue;
      const int count = rng.integer(1, std::min<int>(cfg.ga_max_mutations, static_cast<int>(L)));
      for (int m = 0; m < count; ++m) {
        const std::size_t pos = rng.index(L);
        next[i].a[frame_of[pos]][joint_of[pos]] = random_slot(pos);
        next[i].dirty[frame_of[pos]] = true;
      }
    }
    pop = std::move(next);
    for (auto& g : pop) {
      evaluate(g);
      if (g.energy < result.energy) {
        result.energy = g.energy;
        result.assignment = g.a;
      }
    }
    result.best_per_generation.push_back(result.energy);
  }
  return result;
}

/// Exact minimiser by enumeration. Ties go to the lexicographically smallest
/// slot vector (frames in order, joints in order).
inline std::pair<Assignment, double> brute_force(const EnergyModel& model, double max_candidates = 1e7) {
  const OjaSequence& seq = model.sequence();
  double space = 1.0;
  std::vector<std::pair<int, int>> coords;
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (int j = 0; j < seq[t].joint_count(); ++j) {
      coords.emplace_back(static_cast<int>(t), j);
      space *= seq[t].null_slot(j) + 1;
    }
  if (space > max_candidates)
    throw ArgumentError("brute_force: search space of " + std::to_string(space) + " candidates is too large");
  Assignment A(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) A[t].assign(seq[t].joint_count(), 0);
  Assignment best = A;
  double best_e = model.energy(A);
  while (true) {
    // Odometer increment with the last coordinate fastest.
    int i = static_cast<int>(coords.size()) - 1;
    for (; i >= 0; --i) {
      auto [t, j] = coords[i];
      if (A[t][j] < seq[t].null_slot(j)) {
        ++A[t][j];
        break;
      }
      A[t][j] = 0;
    }
    if (i < 0) break;
    const double e = model.energy(A);
    if (e < best_e) {
      best_e = e;
      best = A;
    }
  }
  return {best, best_e};
}

}  // namespace qoja

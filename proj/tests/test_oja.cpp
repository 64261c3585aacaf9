#include <gtest/gtest.h>

#include "oja_support.hpp"
#include "qoja/oja/training.hpp"

using namespace qoja;
using qoja::testing::random_instance;

namespace {

OjaFrame bare_frame(std::vector<std::vector<Proposal>> joints, const OjaConfig& cfg, Silhouette sil = Silhouette(64, 64, 0)) {
  ProposalSet p;
  p.joints = std::move(joints);
  return prepare_frame(std::move(p), std::move(sil), NormalizationKind::kIdentity, cfg);
}

SkeletonPrior identity_prior(int J) {
  SkeletonPrior p;
  p.mean = Eigen::VectorXd::Zero(2 * J);
  p.covariance = Eigen::MatrixXd::Identity(2 * J, 2 * J);
  p.normalization = NormalizationKind::kIdentity;
  p.refresh_inverse();
  return p;
}

const std::vector<GroundTruthFrame>& trained_frames() {
  static const auto f = training_frames(501, 2000, default_quadruped(), default_pose(default_quadruped()), SynthConfig{});
  return f;
}

const SkeletonPrior& trained_prior() {
  static const SkeletonPrior p = fit_prior(trained_frames(), NormalizationKind::kSilhouette, 3.0, 501);
  return p;
}

}  // namespace

TEST(Prior, IdenticalFramesGiveTinyCovariance) {
  Eigen::VectorXd c(4);
  c << 1, 2, 3, 4;
  const auto p = fit_prior(std::vector<Eigen::VectorXd>{c, c, c});
  EXPECT_EQ(p.mean, c);
  EXPECT_LT(p.covariance.norm(), 1e-12);
  EXPECT_THROW(fit_prior(std::vector<Eigen::VectorXd>{c}), ArgumentError);
}

TEST(Prior, RecoversKnownGaussian) {
  Rng rng(60);
  Eigen::Matrix2d L;
  L << 2.0, 0.0, 1.0, 0.5;
  const Vec2 mu(3.0, -1.0);
  std::vector<Eigen::VectorXd> xs;
  const int n = 10000;
  for (int i = 0; i < n; ++i) xs.push_back(mu + L * Vec2(rng.normal(), rng.normal()));
  const auto p = fit_prior(xs);
  const Eigen::Matrix2d S = L * L.transpose();
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(p.mean[i], mu[i], 4.0 * std::sqrt(S(i, i) / n));
    for (int k = 0; k < 2; ++k) {
      const double se = std::sqrt((S(i, i) * S(k, k) + S(i, k) * S(i, k)) / n);
      EXPECT_NEAR(p.covariance(i, k), S(i, k), 4.0 * se);
    }
  }
  const Eigen::MatrixXd reg = p.covariance + p.epsilon * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_LT((p.inverse * reg - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Prior, TrueConfigurationBeatsLeftRightSwap) {
  const auto& prior = trained_prior();
  const auto model = default_quadruped();
  const auto limits = default_pose(model);
  const auto& s = model.schema;
  int wins = 0;
  const int trials = 500;
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_seed(61, "held-out", i));
    const auto f = random_frame(rng, model, limits, SynthConfig{});
    Points2 swapped = f.joints2d;
    for (int j = 0; j < s.joint_count(); ++j)
      if (s.is_leg_joint(j)) swapped.col(j) = f.joints2d.col(s.alias_of(j));
    const auto norm = normalization_for(prior.normalization, f.silhouette);
    wins += prior.mahalanobis(normalized_configuration(f.joints2d, norm)) <
            prior.mahalanobis(normalized_configuration(swapped, norm));
  }
  EXPECT_GE(wins, 475);
}

TEST(Energy, PriorMatchesDenseSubmatrix) {
  Rng rng(62);
  for (int k = 0; k < 100; ++k) {
    auto inst = random_instance(rng, 5, 3, 1);
    const auto& f = inst.seq[0];
    FrameAssignment a(5);
    for (int j = 0; j < 5; ++j) a[j] = static_cast<int>(rng.index(f.null_slot(j) + 1));
    std::vector<int> rows;
    for (int j = 0; j < 5; ++j)
      if (!f.is_null(j, a[j])) rows.insert(rows.end(), {2 * j, 2 * j + 1});
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd d(m);
    Eigen::MatrixXd S(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const int j = rows[r] / 2;
      d[r] = f.position(j, a[j])[rows[r] % 2] - inst.prior.mean[rows[r]];
      for (Eigen::Index c = 0; c < m; ++c) S(r, c) = inst.prior.inverse(rows[r], rows[c]);
    }
    const double expect = m ? d.dot(S * d) : 0.0;
    EXPECT_NEAR(l_prior(a, f, inst.prior), expect, 1e-9 * (1.0 + std::abs(expect)));
  }
}

TEST(Energy, PriorZeroAtMeanAndWhenAllNull) {
  OjaConfig cfg;
  SkeletonPrior prior = identity_prior(2);
  prior.mean << 3, 4, 5, 6;
  const auto f = bare_frame({{{Vec2(3, 4), 1.0}}, {{Vec2(5, 6), 1.0}}}, cfg);
  EXPECT_NEAR(l_prior({0, 0}, f, prior), 0.0, 1e-12);
  EXPECT_EQ(l_prior({1, 1}, f, prior), 0.0);
}

TEST(Energy, PriorIsTranslationCovariant) {
  Rng rng(63);
  for (int k = 0; k < 50; ++k) {
    auto inst = random_instance(rng, 4, 3, 1);
    const Vec2 shift(rng.uniform(-30, 30), rng.uniform(-30, 30));
    SkeletonPrior moved = inst.prior;
    ProposalSet p = inst.seq[0].proposals;
    for (int j = 0; j < 4; ++j) {
      moved.mean.segment<2>(2 * j) += shift;
      for (auto& q : p.joints[j]) q.position += shift;
    }
    const auto g = bare_frame(p.joints, inst.cfg);
    FrameAssignment a(4);
    for (int j = 0; j < 4; ++j) a[j] = static_cast<int>(rng.index(g.null_slot(j) + 1));
    EXPECT_NEAR(l_prior(a, g, moved), l_prior(a, inst.seq[0], inst.prior), 1e-9);
  }
}

TEST(Energy, ConfidenceExamples) {
  OjaConfig cfg;
  cfg.lambda_conf = 2.0;
  cfg.lambda_null = 5.0;
  const auto f = bare_frame({{{Vec2(1, 1), std::exp(-1.0)}}, {{Vec2(2, 2), 1.0}}}, cfg);
  EXPECT_NEAR(l_conf({0, 0}, f, cfg), 2.0, 1e-12);
  EXPECT_NEAR(l_conf({0, 1}, f, cfg), 7.0, 1e-12);
  EXPECT_NEAR(l_conf({1, 0}, f, cfg), 5.0, 1e-12);
  const auto bad = bare_frame({{{Vec2(1, 1), 0.0}}}, cfg);
  EXPECT_THROW(l_conf({0}, bad, cfg), ValidationError);
}

TEST(Energy, NullThreshold) {
  OjaConfig cfg;
  cfg.lambda_conf = 1.0;
  cfg.lambda_null = 2.0;
  for (double y : {0.05, 0.1, 0.2, 0.5, 0.9}) {
    const auto f = bare_frame({{{Vec2(0, 0), y}}}, cfg);
    const bool null_better = l_conf({1}, f, cfg) < l_conf({0}, f, cfg);
    EXPECT_EQ(null_better, -std::log(y) > cfg.lambda_null);
  }
}

TEST(Energy, TemporalExamples) {
  OjaConfig cfg;
  cfg.lambda_temp = 1.0;
  cfg.tau = 0.7;
  const auto f0 = bare_frame({{{Vec2(10, 10), 1.0}}}, cfg);
  const auto f1 = bare_frame({{{Vec2(13, 14), 1.0}}}, cfg);
  EXPECT_NEAR(l_temp({0}, {0}, f0, f1, 1, cfg), 25.0, 1e-12);
  EXPECT_NEAR(l_temp({0}, {0}, f0, f1, 2, cfg), 25.0 * std::exp(-0.7), 1e-12);
  EXPECT_EQ(l_temp({0}, {0}, f0, f0, 1, cfg), 0.0);
  EXPECT_EQ(l_temp({1}, {0}, f0, f1, 1, cfg), 0.0);
}

TEST(Energy, SilhouetteCoverageExamples) {
  OjaConfig cfg;
  Silhouette sil(64, 64, 0);
  sil(20, 20) = 1;
  auto f = bare_frame({{{Vec2(20.5, 22.5), 1.0}}, {{Vec2(50.5, 50.5), 1.0}}}, cfg, sil);
  ASSERT_EQ(f.mat.points.size(), 1u);
  EXPECT_NEAR(l_cov_sil({0, 0}, f), 8.0, 1e-12);
  EXPECT_NEAR(l_cov_sil({1, 1}, f), std::pow(f.max_distance, 3), 1e-6);
  const auto on = bare_frame({{{Vec2(20.5, 20.5), 1.0}}}, cfg, sil);
  EXPECT_EQ(l_cov_sil({0}, on), 0.0);
}

TEST(Energy, SilhouetteCoverageMatchesDoubleLoop) {
  Rng rng(64);
  OjaConfig cfg;
  for (int k = 0; k < 20; ++k) {
    const Silhouette sil = qoja::testing::random_blob(rng);
    std::vector<std::vector<Proposal>> js(6);
    for (auto& j : js)
      for (int q = 0; q < 2; ++q) j.push_back({Vec2(rng.uniform(0, 64), rng.uniform(0, 64)), 0.5});
    const auto f = bare_frame(js, cfg, sil);
    FrameAssignment a(6);
    for (auto& s : a) s = static_cast<int>(rng.index(3));
    double expect = 0.0;
    bool any = false;
    for (int j = 0; j < 6; ++j) any |= a[j] < 2;
    for (const auto& z : f.mat.points) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < 6; ++j)
        if (a[j] < 2) best = std::min(best, std::pow((z - js[j][a[j]].position).norm(), 3));
      expect += any ? best : std::pow(f.max_distance, 3);
    }
    EXPECT_NEAR(l_cov_sil(a, f), expect, 1e-9 * (1.0 + expect));
  }
}

TEST(Energy, BoneCoverageExamples) {
  OjaConfig cfg;
  cfg.dilation_radius = 0.0;
  Silhouette sil(64, 64, 0);
  for (int y = 10; y < 20; ++y)
    for (int x = 10; x < 50; ++x) sil(x, y) = 1;
  for (int y = 40; y < 50; ++y)
    for (int x = 10; x < 50; ++x) sil(x, y) = 1;
  const auto f = bare_frame({{{Vec2(12, 15), 1.0}}, {{Vec2(45, 15), 1.0}, {Vec2(45, 45), 1.0}}}, cfg, sil);
  const std::vector<Bone> bones{{0, 1}};
  EXPECT_EQ(l_cov_bone({0, 0}, f, bones), 0.0);
  EXPECT_EQ(l_cov_bone({0, 1}, f, bones), 1.0);
  EXPECT_EQ(l_cov_bone({0, 2}, f, bones), 0.0);
}

TEST(Energy, AllNullSequence) {
  OjaConfig cfg;
  Silhouette sil(64, 64, 0);
  for (int y = 20; y < 40; ++y)
    for (int x = 20; x < 40; ++x) sil(x, y) = 1;
  std::vector<std::vector<Proposal>> js(3, {{Vec2(30, 30), 0.5}});
  ProposalSet p;
  p.joints = js;
  OjaSequence seq;
  for (int t = 0; t < 2; ++t) seq.push_back(prepare_frame(p, sil, NormalizationKind::kSilhouette, cfg));
  SkeletonPrior prior = identity_prior(3);
  const Assignment A(2, FrameAssignment(3, 1));
  double cover = 0.0;
  for (const auto& f : seq) cover += f.cov_sil_weight * f.mat.points.size() * std::pow(f.max_distance, 3);
  EXPECT_NEAR(total_energy(A, seq, prior, cfg, {{0, 1}, {1, 2}}), 2 * 3 * cfg.lambda_null + cover, 1e-6 * cover);
}

TEST(Energy, TermsSumWithoutDoubleCounting) {
  Rng rng(65);
  for (int k = 0; k < 50; ++k) {
    auto inst = random_instance(rng, 3, 2, 4);
    inst.cfg.window = 2;
    Assignment A(4, FrameAssignment(3));
    for (int t = 0; t < 4; ++t)
      for (int j = 0; j < 3; ++j) A[t][j] = static_cast<int>(rng.index(inst.seq[t].null_slot(j) + 1));
    double expect = 0.0;
    for (int t = 0; t < 4; ++t) expect += l_prior(A[t], inst.seq[t], inst.prior) + l_conf(A[t], inst.seq[t], inst.cfg);
    for (int t0 = 0; t0 < 4; ++t0)
      for (int t1 = t0 + 1; t1 <= std::min(3, t0 + 2); ++t1)
        expect += l_temp(A[t0], A[t1], inst.seq[t0], inst.seq[t1], t1 - t0, inst.cfg);
    EXPECT_NEAR(total_energy(A, inst.seq, inst.prior, inst.cfg, {}), expect, 1e-9 * (1.0 + expect));
  }
}

TEST(Energy, TruthBeatsAliasSwap) {
  const auto model = default_quadruped();
  const auto limits = default_pose(model);
  const auto& s = model.schema;
  OjaConfig cfg;
  int wins = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(derive_seed(66, "frame", i));
    const auto f = random_frame(rng, model, limits, SynthConfig{});
    ProposalSet p;
    p.joints.resize(s.joint_count());
    FrameAssignment truth(s.joint_count(), 0), swapped(s.joint_count(), 0);
    for (int j = 0; j < s.joint_count(); ++j) {
      p.joints[j].push_back({f.joints2d.col(j), 1.0});
      if (s.is_leg_joint(j)) {
        p.joints[j].push_back({f.joints2d.col(s.alias_of(j)), 1.0});
        swapped[j] = 1;
      }
    }
    OjaSequence seq{prepare_frame(p, f.silhouette, trained_prior().normalization, cfg)};
    wins += total_energy({truth}, seq, trained_prior(), cfg, s.bones) <=
            total_energy({swapped}, seq, trained_prior(), cfg, s.bones);
  }
  EXPECT_GE(wins, 90);
}

TEST(Qp, QuadraticFormMatchesEnergy) {
  Rng rng(67);
  for (int k = 0; k < 500; ++k) {
    const int T = 1 + static_cast<int>(rng.index(3));
    auto inst = random_instance(rng, 1 + static_cast<int>(rng.index(5)), 3, T);
    inst.cfg.window = 1 + static_cast<int>(rng.index(2));
    const QpProblem qp = build_qp(inst.seq, inst.prior, inst.cfg);
    Assignment A(T);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < inst.seq[t].joint_count(); ++j)
        A[t].push_back(static_cast<int>(rng.index(inst.seq[t].null_slot(j) + 1)));
    const double e = total_energy(A, inst.seq, inst.prior, inst.cfg, {});
    ASSERT_NEAR(qp.quadratic_form(qp.one_hot(A)), e, 1e-9 * (1.0 + std::abs(e))) << "instance " << k;
    ASSERT_NEAR(qp.energy(A), e, 1e-9 * (1.0 + std::abs(e)));
  }
}

TEST(Qp, StructureIsSymmetric) {
  Rng rng(68);
  auto inst = random_instance(rng, 4, 3, 3);
  const QpProblem qp = build_qp(inst.seq, inst.prior, inst.cfg);
  const Eigen::MatrixXd Q = qp.dense_prior(), Tm = qp.dense_temporal();
  EXPECT_LT((Q - Q.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((Tm - Tm.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  int dim = 0;
  for (const auto& f : inst.seq)
    for (int j = 0; j < f.joint_count(); ++j) dim += f.null_slot(j) + 1;
  EXPECT_EQ(qp.dimension, dim);
  for (const auto& f : qp.frames) {
    const auto n = f.c.size();
    EXPECT_EQ(Tm.block(f.offset, f.offset, n, n).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Qp, TwoFrameTemporalCoupling) {
  OjaConfig cfg;
  cfg.lambda_temp = 1.0;
  cfg.tau = 50.0;
  cfg.window = 1;
  const auto f0 = bare_frame({{{Vec2(0, 0), 1.0}}, {{Vec2(5, 5), 1.0}}}, cfg);
  const auto f1 = bare_frame({{{Vec2(3, 4), 1.0}}, {{Vec2(5, 6), 1.0}}}, cfg);
  SkeletonPrior prior = identity_prior(2);
  const OjaSequence seq{f0, f1};
  const QpProblem qp = build_qp(seq, prior, cfg);
  const Assignment A{{0, 0}, {0, 0}};
  const Eigen::VectorXd v = qp.one_hot(A);
  EXPECT_NEAR(v.dot(qp.dense_temporal() * v), 25.0 + 1.0, 1e-12);
}

TEST(Qp, EmptyListsLeaveNullOnly) {
  OjaConfig cfg;
  const auto f = bare_frame({{}, {}}, cfg);
  const QpProblem qp = build_qp({f}, identity_prior(2), cfg);
  EXPECT_EQ(qp.dimension, 2);
  EXPECT_EQ(qp.dense_linear(), Eigen::Vector2d(cfg.lambda_null, cfg.lambda_null));
  EXPECT_EQ(qp.dense_prior().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Qp, SizeLimitIsEnforced) {
  Rng rng(69);
  auto inst = random_instance(rng, 5, 3, 3);
  inst.cfg.qp_max_entries = 10;
  EXPECT_THROW(build_qp(inst.seq, inst.prior, inst.cfg), ArgumentError);
}

TEST(Qp, SingleProposalsAreKept) {
  OjaConfig cfg;
  cfg.lambda_null = 1e3;
  const auto f = bare_frame({{{Vec2(1, 1), 0.9}}, {{Vec2(2, 2), 0.8}}}, cfg);
  const OjaSequence seq{f};
  const auto sol = solve_qp(build_qp(seq, identity_prior(2), cfg), seq, cfg, 1);
  EXPECT_EQ(sol.assignment, (Assignment{{0, 0}}));
}

TEST(Qp, IcmIsMonotoneAndEndsAtLocalOptimum) {
  Rng rng(70);
  for (int k = 0; k < 100; ++k) {
    auto inst = random_instance(rng, 5, 3, 2);
    const QpProblem qp = build_qp(inst.seq, inst.prior, inst.cfg);
    const auto sol = solve_qp(qp, inst.seq, inst.cfg, k);
    for (std::size_t i = 1; i < sol.sweep_energies.size(); ++i)
      EXPECT_LE(sol.sweep_energies[i], sol.sweep_energies[i - 1] + 1e-12);
    EXPECT_TRUE(is_local_optimum(qp, sol.assignment));
    EXPECT_LE(sol.energy, sol.suggest_energy + 1e-12);
    EXPECT_GE(sol.energy, qoja::testing::exhaustive_minimum(inst) - 1e-9);
  }
}

TEST(Qp, FlipsToLowConfidenceProposalThatFitsPrior) {
  OjaConfig cfg;
  cfg.lambda_null = 100.0;
  SkeletonPrior prior = identity_prior(1);
  const auto f = bare_frame({{{Vec2(6, 0), 0.9}, {Vec2(0.5, 0), 0.3}}}, cfg);
  const OjaSequence seq{f};
  const auto sol = solve_qp(build_qp(seq, prior, cfg), seq, cfg, 1);
  EXPECT_EQ(sol.assignment[0][0], 1);
}

TEST(BruteForce, HandInstance) {
  OjaConfig cfg;
  cfg.lambda_conf = 1.0;
  cfg.lambda_null = 3.0;
  cfg.w_cov_sil = cfg.w_cov_bone = 0.0;
  SkeletonPrior prior = identity_prior(2);
  // Costs by hand, with l_prior = |x|^2 / (1 + eps):
  //   joint 0: (1, 0) y=1 -> 1;  (0, 0.5) y=e^-1 -> 1.25;  null -> 3
  //   joint 1: (2, 0) y=1 -> 4;  (1, 1) y=e^-0.5 -> 2.5;   null -> 3
  const auto f = bare_frame({{{Vec2(1, 0), 1.0}, {Vec2(0, 0.5), std::exp(-1.0)}},
                             {{Vec2(2, 0), 1.0}, {Vec2(1, 1), std::exp(-0.5)}}},
                            cfg);
  const OjaSequence seq{f};
  const EnergyModel model(seq, prior, cfg, {});
  const auto [A, e] = brute_force(model);
  EXPECT_EQ(A, (Assignment{{0, 1}}));
  EXPECT_NEAR(e, 3.5, 1e-5);
}

TEST(BruteForce, MatchesExhaustiveOracle) {
  Rng rng(71);
  for (int k = 0; k < 30; ++k) {
    auto inst = random_instance(rng, 4, 3, 2);
    const EnergyModel model(inst.seq, inst.prior, inst.cfg, {});
    EXPECT_NEAR(brute_force(model).second, qoja::testing::exhaustive_minimum(inst), 1e-9);
  }
}

TEST(BruteForce, ReorderingKeepsOptimum) {
  Rng rng(72);
  for (int k = 0; k < 20; ++k) {
    auto inst = random_instance(rng, 4, 3, 1);
    const EnergyModel a(inst.seq, inst.prior, inst.cfg, {});
    ProposalSet p = inst.seq[0].proposals;
    for (auto& js : p.joints) std::reverse(js.begin(), js.end());
    const OjaSequence seq{bare_frame(p.joints, inst.cfg)};
    const EnergyModel b(seq, inst.prior, inst.cfg, {});
    EXPECT_NEAR(brute_force(a).second, brute_force(b).second, 1e-9);
  }
}

TEST(BruteForce, RejectsLargeSpaces) {
  Rng rng(73);
  auto inst = random_instance(rng, 5, 3, 2);
  const EnergyModel model(inst.seq, inst.prior, inst.cfg, {});
  EXPECT_THROW(brute_force(model, 2.0), ArgumentError);
}

TEST(BruteForce, NullCountMonotoneInNullCost) {
  Rng rng(74);
  for (int k = 0; k < 20; ++k) {
    auto inst = random_instance(rng, 4, 3, 1);
    int previous = 5;
    for (double lambda : {0.01, 0.5, 1.0, 2.0, 4.0, 8.0, 1e6}) {
      inst.cfg.lambda_null = lambda;
      const OjaSequence seq = inst.seq;
      const EnergyModel model(seq, inst.prior, inst.cfg, {});
      const auto A = brute_force(model).first;
      int nulls = 0, forced = 0;
      for (int j = 0; j < 4; ++j) {
        nulls += seq[0].is_null(j, A[0][j]);
        forced += seq[0].null_slot(j) == 0;
      }
      EXPECT_LE(nulls, previous);
      previous = nulls;
      if (lambda == 1e6) EXPECT_EQ(nulls, forced);
    }
  }
}

TEST(Ga, DeterministicUnderSeed) {
  Rng rng(75);
  auto inst = random_instance(rng, 5, 3, 2);
  inst.cfg.ga_generations = 200;
  const EnergyModel model(inst.seq, inst.prior, inst.cfg, {});
  const auto a = solve_ga(model, inst.cfg, 9);
  const auto b = solve_ga(model, inst.cfg, 9);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.best_per_generation, b.best_per_generation);
}

TEST(Ga, SeededWithQpNeverWorse) {
  Rng rng(76);
  for (int k = 0; k < 20; ++k) {
    auto inst = random_instance(rng, 5, 3, 2);
    inst.cfg.ga_generations = 100;
    const EnergyModel model(inst.seq, inst.prior, inst.cfg, {});
    const auto qp = solve_qp(model.qp(), inst.seq, inst.cfg, k);
    const auto ga = solve_ga(model, inst.cfg, k, {qp.assignment});
    EXPECT_LE(ga.energy, qp.energy + 1e-9);
    EXPECT_NEAR(ga.energy, model.energy(ga.assignment), 1e-9);
    for (std::size_t g = 1; g < ga.best_per_generation.size(); ++g)
      EXPECT_LE(ga.best_per_generation[g], ga.best_per_generation[g - 1]);
  }
}

TEST(Ga, FindsExhaustiveOptimum) {
  Rng rng(77);
  int hits = 0;
  for (int k = 0; k < 20; ++k) {
    auto inst = random_instance(rng, 5, 3, 2);
    const EnergyModel model(inst.seq, inst.prior, inst.cfg, {});
    hits += std::abs(solve_ga(model, inst.cfg, k).energy - qoja::testing::exhaustive_minimum(inst)) <= 1e-9;
  }
  EXPECT_GE(hits, 19);
}

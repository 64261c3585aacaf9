#include <gtest/gtest.h>

#include "fit_support.hpp"
#include "qoja/eval/report.hpp"
#include "qoja/oja/training.hpp"

using namespace qoja;
using namespace qoja::testing;

namespace {

Points2 grid(int J) {
  Points2 p(2, J);
  for (int j = 0; j < J; ++j) p.col(j) = Vec2(10.0 * j, 5.0 * j);
  return p;
}

}  // namespace

TEST(Pck, PerfectPrediction) {
  const Points2 g = grid(6);
  const std::vector<bool> all(6, true);
  EXPECT_EQ(*pck(g, all, g, all, 100.0), 100.0);
}

TEST(Pck, BoundaryIsInclusive) {
  const Points2 g = grid(6);
  Points2 p = g;
  p.col(2) += Vec2(20.0, 0.0);
  const std::vector<bool> all(6, true);
  EXPECT_EQ(*pck(p, all, g, all, 10000.0, {0.2, 1}), 100.0);
  p.col(2) += Vec2(1e-9, 0.0);
  EXPECT_NEAR(*pck(p, all, g, all, 10000.0, {0.2, 1}), 500.0 / 6.0, 1e-12);
}

TEST(Pck, HalfOffset) {
  const Points2 g = grid(8);
  Points2 p = g;
  for (int j = 0; j < 4; ++j) p.col(j) += Vec2(0.0, 50.0);
  const std::vector<bool> all(8, true);
  EXPECT_EQ(*pck(p, all, g, all, 10000.0), 50.0);
}

TEST(Pck, NullsMissAndInvisibleSkipped) {
  const Points2 g = grid(4);
  std::vector<bool> present{true, false, true, true}, visible{true, true, false, true};
  const auto c = pck_count(g, present, g, visible, 100.0);
  EXPECT_EQ(c.visible, 3);
  EXPECT_EQ(c.hits, 2);
  EXPECT_FALSE(pck(g, present, g, std::vector<bool>(4, false), 100.0).has_value());
  EXPECT_THROW(pck(g, present, g, visible, 0.0), ArgumentError);
}

TEST(Pck, ScaleInvariantAndMonotoneInAlpha) {
  Rng rng(100);
  for (int k = 0; k < 50; ++k) {
    Points2 g(2, 10), p(2, 10);
    for (int j = 0; j < 10; ++j) {
      g.col(j) = Vec2(rng.uniform(0, 100), rng.uniform(0, 100));
      p.col(j) = g.col(j) + Vec2(rng.normal(), rng.normal()) * 10.0;
    }
    const std::vector<bool> all(10, true);
    const double area = rng.uniform(500, 5000), s = rng.uniform(0.5, 3.0);
    EXPECT_EQ(*pck(p, all, g, all, area), *pck(s * p, all, s * g, all, s * s * area));
    double last = 101.0;
    for (double a : {0.4, 0.3, 0.2, 0.1, 0.05}) {
      const double v = *pck(p, all, g, all, area, {a, 1});
      EXPECT_LE(v, last);
      last = v;
    }
  }
}

TEST(Joint3d, IdenticalAndTranslated) {
  Rng rng(101);
  const auto f = random_frame(rng, quadruped(), pose_limits(), SynthConfig{});
  const FitParams p = truth_params(f);
  EXPECT_EQ(joint3d_error(p, p, quadruped()), 0.0);
  FitParams q = p;
  q.position.translation += Vec3(0.3, -1.0, 2.0);
  EXPECT_NEAR(joint3d_error(q, p, quadruped()), 0.0, 1e-12);
  EXPECT_GT(joint3d_error(q, p, quadruped(), false), 1.0);
}

TEST(Joint3d, RotatedLeafBone) {
  const auto& m = quadruped();
  const auto& topo = m.topology;
  Rng rng(102);
  const auto f = random_frame(rng, m, pose_limits(), SynthConfig{});
  const FitParams gt = truth_params(f);
  int tested = 0;
  for (int b = 0; b < m.bone_count(); ++b) {
    const int c = topo.bone_child[b], par = topo.bone_parent[b];
    const bool leaf = std::count(topo.bone_parent.begin(), topo.bone_parent.end(), c) == 0;
    const bool only_child = std::count(topo.bone_parent.begin(), topo.bone_parent.end(), par) == 1;
    if (!leaf || !only_child || topo.pose_slot[par] < 0 || par == 0) continue;
    FitParams pred = gt;
    pred.theta[topo.pose_slot[par] + 1] += kPi / 2;
    const Points3 a = forward_kinematics(shaped_model(m, gt), gt.theta, gt.position);
    const Points3 r = forward_kinematics(shaped_model(m, pred), pred.theta, pred.position);
    const Vec3 before = a.col(c) - a.col(par), after = r.col(c) - r.col(par);
    const double L = before.norm();
    ASSERT_NEAR(after.norm(), L, 1e-9);
    // Chord of the swing; interior samples at u = k/6 move u times as far.
    const double chord = (after - before).norm();
    const double expect = chord * (1.0 + (1 + 2 + 3 + 4 + 5) / 6.0) / (m.joint_count() + 5 * m.bone_count());
    EXPECT_NEAR(joint3d_error(pred, gt, m), expect, 1e-9);
    ++tested;
  }
  EXPECT_GE(tested, 4);
}

TEST(Report, CleanProposalsScorePerfectly) {
  const auto& m = quadruped();
  SynthConfig cfg;
  cfg.corruption = CorruptionConfig{0, 0, 0, 0, 0, 0, 0};
  std::vector<SyntheticSequence> data;
  for (int s = 0; s < 2; ++s) data.push_back(generate_sequence(103, s, 3, m, pose_limits(), cfg));
  const auto prior = fit_prior(training_frames(104, 400, m, pose_limits(), SynthConfig{}), NormalizationKind::kSilhouette,
                               3.0, 104);
  OjaConfig ocfg;
  ocfg.ga_generations = 50;
  const auto r = compare_methods(data, prior, ocfg, PckConfig{}, m.schema, 105);
  ASSERT_EQ(r.methods.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(*r.average[k].percent(), 100.0) << r.methods[k];
}

TEST(Report, AveragesPoolFrames) {
  EvalReport r;
  r.methods = {"a", "b"};
  r.joint_names = {"x"};
  Rng rng(106);
  for (int s = 0; s < 3; ++s) {
    SequenceScore sc("s" + std::to_string(s), 2, 1);
    sc.frames.resize(4, std::vector<PckCount>(2));
    for (auto& f : sc.frames)
      for (auto& c : f) {
        c.visible = 1 + static_cast<int>(rng.index(10));
        c.hits = static_cast<int>(rng.index(c.visible + 1));
      }
    r.sequences.push_back(sc);
  }
  r.recompute_totals();
  for (int m = 0; m < 2; ++m) {
    double hits = 0, vis = 0;
    for (const auto& s : r.sequences)
      for (const auto& f : s.frames) {
        hits += f[m].hits;
        vis += f[m].visible;
      }
    EXPECT_NEAR(*r.average[m].percent(), 100.0 * hits / vis, 1e-9);
  }
  const auto text = to_text(r);
  EXPECT_NE(text.find("Average"), std::string::npos);
  EXPECT_EQ(text.find("3D"), std::string::npos);
}

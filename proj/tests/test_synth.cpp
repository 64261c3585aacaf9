#include <gtest/gtest.h>

#include "qoja/synth/generator.hpp"

using namespace qoja;

namespace {

const ProxyQuadruped& model() {
  static const ProxyQuadruped m = default_quadruped();
  return m;
}

const PoseParams& limits() {
  static const PoseParams p = default_pose(model());
  return p;
}

}  // namespace

TEST(Camera, DrawsStayInTheirRanges) {
  Rng rng(10);
  CameraSamplingConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const auto c = sample_camera(rng, Vec3::Zero(), cfg);
    EXPECT_GE(c.distance, 1.0);
    EXPECT_LE(c.distance, 20.0);
    EXPECT_GE(c.elevation, 0.0);
    EXPECT_LE(c.elevation, kPi / 2);
    EXPECT_LE((c.target).cwiseAbs().maxCoeff(), 0.5);
    EXPECT_NEAR((c.eye - Vec3::Zero()).norm(), c.distance, 1e-9);
  }
}

TEST(Camera, FixedSeedRepeats) {
  Rng a(11), b(11);
  const auto x = sample_camera(a, Vec3(1, 2, 3));
  const auto y = sample_camera(b, Vec3(1, 2, 3));
  EXPECT_EQ(x.eye, y.eye);
  EXPECT_EQ(x.world_to_camera.rotation.coeffs(), y.world_to_camera.rotation.coeffs());
}

TEST(Camera, AzimuthIsUniform) {
  Rng rng(12);
  const int n = 100000, bins = 10;
  std::vector<int> hist(bins, 0);
  for (int i = 0; i < n; ++i) {
    const double a = sample_camera(rng, Vec3::Zero()).azimuth;
    ++hist[std::min(bins - 1, static_cast<int>(a / (2 * kPi) * bins))];
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(n) / bins;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  EXPECT_LT(chi2, 21.666);  // chi-square, 9 dof, p = 0.01
}

TEST(Camera, WorldToCameraLooksAtTarget) {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto c = sample_camera(rng, Vec3::Zero());
    const Vec3 t = c.world_to_camera.apply(c.target);
    EXPECT_NEAR(t.x(), 0.0, 1e-9);
    EXPECT_NEAR(t.y(), 0.0, 1e-9);
    EXPECT_GT(t.z(), 0.0);
    EXPECT_LT(c.world_to_camera.apply(c.eye).norm(), 1e-9);
  }
}

TEST(PoseShape, DrawsRespectLimits) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    auto [pose, shape] = sample_pose_shape(rng, model(), limits());
    EXPECT_TRUE(pose.within_limits());
    EXPECT_TRUE((shape.lengths.array() > 0).all());
    EXPECT_TRUE((shape.radii.array() > 0).all());
  }
}

TEST(PoseShape, ZeroVarianceReturnsTemplate) {
  Rng rng(15);
  ShapePoseSamplingConfig cfg{0.0, 0.0, 0.0, 0.0};
  auto [pose, shape] = sample_pose_shape(rng, model(), limits(), cfg);
  EXPECT_EQ(pose.theta, limits().theta);
  EXPECT_EQ(shape.lengths, model().bone_lengths);
  EXPECT_EQ(shape.radii, model().capsule_radii);
}

TEST(PoseShape, MirroredBonesShareTheirDraw) {
  Rng rng(16);
  auto [pose, shape] = sample_pose_shape(rng, model(), limits());
  const auto mirror = mirror_bones(model());
  for (int b = 0; b < model().bone_count(); ++b) {
    const double rb = shape.lengths[b] / model().bone_lengths[b];
    const double rm = shape.lengths[mirror[b]] / model().bone_lengths[mirror[b]];
    EXPECT_NEAR(rb, rm, 1e-12);
  }
}

TEST(PoseShape, RandomFramesHaveForeground) {
  SynthConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    Rng rng(derive_seed(17, "frame", i));
    const auto f = random_frame(rng, model(), limits(), cfg);
    EXPECT_GT(f.silhouette.area(), 0u);
  }
}

TEST(Animation, SingleFrameIsTheInitialState) {
  Rng rng(18);
  FrameState init{limits().theta, PositionParams{}};
  init.position.translation = Vec3(0, 0, 5);
  const auto s = animate_sequence(rng, 1, model(), limits(), init, CameraModel{});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].theta, init.theta);
  EXPECT_EQ(s[0].position.translation, init.position.translation);
}

TEST(Animation, ZeroStepGivesIdenticalFrames) {
  Rng rng(19);
  FrameState init{limits().theta, PositionParams{}};
  init.position.translation = Vec3(0, 0, 5);
  AnimationConfig cfg;
  cfg.step_sigma = 0.0;
  cfg.forward_speed = 0.0;
  const auto s = animate_sequence(rng, 10, model(), limits(), init, CameraModel{}, cfg);
  for (const auto& f : s) {
    EXPECT_EQ(f.theta, init.theta);
    EXPECT_EQ(f.position.translation, init.position.translation);
  }
}

TEST(Animation, RejectsEmptySequences) {
  Rng rng(20);
  EXPECT_THROW(animate_sequence(rng, 0, model(), limits(), FrameState{limits().theta, {}}, CameraModel{}),
               ArgumentError);
}

TEST(Animation, FrameStepIsBounded) {
  SynthConfig cfg;
  for (int s = 0; s < 100; ++s) {
    const auto seq = generate_sequence(21, s, 12, model(), limits(), cfg);
    double worst = 0.0;
    for (std::size_t t = 1; t < seq.frames.size(); ++t)
      worst = std::max(worst, (seq.frames[t].joints2d - seq.frames[t - 1].joints2d).colwise().norm().maxCoeff());
    EXPECT_LE(worst, cfg.animation.max_joint_step_px + 1e-9);
  }
}

TEST(Raster, HeadOnCapsuleIsADisc) {
  CameraModel cam;
  cam.focal = 500;
  const double r = 0.2, z = 5.0;
  const Capsule c{Vec3(0, 0, z), Vec3(0, 0, z + 0.5), r};
  const Silhouette s = rasterize_capsules(cam, {c});
  const double rad = cam.focal * r / z;
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const double d = (Vec2(x + 0.5, y + 0.5) - Vec2(cam.cx, cam.cy)).norm();
      if (d < rad - 1.0) EXPECT_TRUE(s(x, y)) << x << "," << y;
      if (d > rad + 1.0) EXPECT_FALSE(s(x, y)) << x << "," << y;
    }
}

TEST(Raster, OutsideFrustumThrows) {
  CameraModel cam;
  PositionParams p;
  p.translation = Vec3(100, 0, 5);
  EXPECT_THROW(rasterize_silhouette(cam, model(), limits().theta, p), GeometryError);
  p.translation = Vec3(0, 0, -10);
  EXPECT_THROW(rasterize_silhouette(cam, model(), limits().theta, p), GeometryError);
}

TEST(Raster, CameraRollPreservesArea) {
  Rng rng(22);
  SynthConfig cfg;
  for (int i = 0; i < 20; ++i) {
    const auto f = random_frame(rng, model(), limits(), cfg);
    const ProxyQuadruped shaped = with_shape(model(), f.shape);
    PositionParams roll;
    roll.rotation = Quat(Eigen::AngleAxisd(rng.uniform(0, 2 * kPi), Vec3::UnitZ()));
    // Rolling about the optical axis; shrink slightly so nothing leaves the frame.
    CameraModel cam = f.camera;
    cam.focal *= 0.7;
    const auto a = rasterize_silhouette(cam, shaped, f.theta, f.position);
    const auto b = rasterize_silhouette(cam, shaped, f.theta, roll.compose(f.position));
    EXPECT_NEAR(static_cast<double>(b.area()) / a.area(), 1.0, 0.02);
  }
}

TEST(Truth, JointsProjectConsistently) {
  SynthConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    Rng rng(derive_seed(23, "frame", i));
    const auto f = random_frame(rng, model(), limits(), cfg);
    const Points2 q = project_joints(f.camera, f.joints3d);
    EXPECT_LT((q - f.joints2d).cwiseAbs().maxCoeff(), 1e-9);
    for (int j = 0; j < model().joint_count(); ++j) {
      if (!f.visibility[j]) continue;
      EXPECT_TRUE(f.silhouette.foreground_at(f.joints2d.col(j))) << "frame " << i << " joint " << j;
    }
  }
}

TEST(Heatmaps, UnitPeakOnNonLegJoints) {
  const auto s = default_schema();
  Points2 p = Points2::Constant(2, s.joint_count(), -100.0);
  p.col(joints::kHead) = Vec2(40.5, 60.5);
  const auto h = encode_heatmaps(p, s.alias_weights, 4.0, 128, 128);
  EXPECT_NEAR(h[joints::kHead](40, 60), 1.0, 1e-12);
}

TEST(Heatmaps, LegChannelsCarryAliasMass) {
  const auto s = default_schema();
  Points2 p = Points2::Constant(2, s.joint_count(), -100.0);
  const int j = joints::kFrontLeftPaw, k = s.alias_of(j);
  p.col(j) = Vec2(20.5, 30.5);
  p.col(k) = Vec2(100.5, 90.5);
  const auto h = encode_heatmaps(p, s.alias_weights, 4.0, 128, 128);
  EXPECT_NEAR(h[j](20, 30), 0.75, 1e-6);
  EXPECT_NEAR(h[j](100, 90), 0.25, 1e-6);
  EXPECT_NEAR(h[k](100, 90), 0.75, 1e-6);
  EXPECT_NEAR(h[k](20, 30), 0.25, 1e-6);
}

TEST(Heatmaps, CoincidentAliasPeaksAtOne) {
  const auto s = default_schema();
  Points2 p = Points2::Constant(2, s.joint_count(), -100.0);
  const int j = joints::kBackRightKnee, k = s.alias_of(j);
  p.col(j) = p.col(k) = Vec2(64.5, 64.5);
  const auto h = encode_heatmaps(p, s.alias_weights, 4.0, 128, 128);
  EXPECT_NEAR(h[j](64, 64), 1.0, 1e-12);
}

TEST(Heatmaps, ValuesStayInUnitRangeAndScaleLinearly) {
  const auto s = default_schema();
  Rng rng(24);
  Points2 p(2, s.joint_count());
  for (int j = 0; j < p.cols(); ++j) p.col(j) = Vec2(rng.uniform(0, 64), rng.uniform(0, 64));
  const auto h = encode_heatmaps(p, s.alias_weights, 3.0, 64, 64);
  const auto h2 = encode_heatmaps(p, 2.0 * s.alias_weights, 3.0, 64, 64);
  for (int j = 0; j < s.joint_count(); ++j)
    for (std::size_t i = 0; i < h[j].size(); ++i) {
      EXPECT_GE(h[j].data()[i], 0.0);
      EXPECT_LE(h[j].data()[i], 1.0 + 1e-9);
      EXPECT_NEAR(h2[j].data()[i], 2.0 * h[j].data()[i], 1e-12);
    }
  EXPECT_THROW(encode_heatmaps(p, s.alias_weights, 0.0, 8, 8), ArgumentError);
}

TEST(Corruption, ZeroConfigIsExact) {
  CorruptionConfig cfg{0, 0, 0, 0, 0, 0, 0};
  SynthConfig scfg;
  for (int i = 0; i < 50; ++i) {
    Rng rng(derive_seed(25, "frame", i));
    const auto f = random_frame(rng, model(), limits(), scfg);
    const auto props = corrupt_proposals(f, model().schema, cfg, rng);
    for (int j = 0; j < model().joint_count(); ++j) {
      ASSERT_TRUE(f.camera.in_image(f.joints2d.col(j)));
      ASSERT_EQ(props.count(j), 1);
      EXPECT_EQ(props.joints[j][0].position, Vec2(f.joints2d.col(j)));
      EXPECT_EQ(props.joints[j][0].confidence, 1.0);
    }
  }
}

TEST(Corruption, FullDropoutRemovesTrueProposals) {
  CorruptionConfig cfg;
  cfg.dropout_prob = 1.0;
  cfg.jitter_sigma = 0.0;
  cfg.alias_swap_prob = 0.0;
  Rng rng(26);
  const auto f = random_frame(rng, model(), limits(), SynthConfig{});
  CorruptionTrace trace;
  const auto props = corrupt_proposals(f, model().schema, cfg, rng, &trace);
  for (int j = 0; j < model().joint_count(); ++j) {
    EXPECT_TRUE(trace.dropped[j]);
    for (const auto& p : props.joints[j]) EXPECT_NE(p.position, Vec2(f.joints2d.col(j)));
  }
}

TEST(Corruption, ConfidencesInUnitInterval) {
  Rng rng(27);
  const auto f = random_frame(rng, model(), limits(), SynthConfig{});
  CorruptionConfig cfg;
  cfg.spurious_rate = 3.0;
  for (int i = 0; i < 100; ++i) {
    const auto props = corrupt_proposals(f, model().schema, cfg, rng);
    for (const auto& js : props.joints)
      for (const auto& p : js) {
        EXPECT_GT(p.confidence, 0.0);
        EXPECT_LE(p.confidence, 1.0);
      }
  }
}

TEST(Corruption, AliasSwapFrequency) {
  CorruptionConfig cfg;
  cfg.alias_swap_prob = 0.5;
  Rng frame_rng(28);
  const auto f = random_frame(frame_rng, model(), limits(), SynthConfig{});
  std::vector<int> legs;
  for (int j = 0; j < model().joint_count(); ++j)
    if (model().schema.is_leg_joint(j)) legs.push_back(j);
  int swaps = 0, draws = 0;
  Rng rng(29);
  while (draws < 10000) {
    CorruptionTrace trace;
    corrupt_proposals(f, model().schema, cfg, rng, &trace);
    for (int j : legs) {
      swaps += trace.swapped[j];
      ++draws;
    }
  }
  EXPECT_NEAR(static_cast<double>(swaps) / draws, 0.5, 0.02);
}

TEST(Corruption, SeedReproducible) {
  Rng r0(30);
  const auto f = random_frame(r0, model(), limits(), SynthConfig{});
  Rng a(31), b(31);
  EXPECT_EQ(corrupt_proposals(f, model().schema, CorruptionConfig{}, a),
            corrupt_proposals(f, model().schema, CorruptionConfig{}, b));
}

TEST(Sequence, GenerationIsDeterministic) {
  SynthConfig cfg;
  const auto a = generate_sequence(32, 3, 5, model(), limits(), cfg);
  const auto b = generate_sequence(32, 3, 5, model(), limits(), cfg);
  ASSERT_EQ(a.frames.size(), 5u);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(a.frames[t].silhouette, b.frames[t].silhouette);
    EXPECT_EQ(a.frames[t].joints2d, b.frames[t].joints2d);
    EXPECT_EQ(a.proposals[t], b.proposals[t]);
  }
}

#include <gtest/gtest.h>

#include <filesystem>

#include "fit_support.hpp"
#include "qoja/io/config.hpp"
#include "qoja/io/image_io.hpp"
#include "qoja/io/json_io.hpp"
#include "qoja/oja/training.hpp"

using namespace qoja;
using namespace qoja::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qoja_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GroundTruthFrame frame(std::uint64_t seed) {
  Rng rng(seed);
  return random_frame(rng, quadruped(), pose_limits(), SynthConfig{});
}

}  // namespace

TEST(Json, SchemaRoundTrip) {
  const auto s = default_schema();
  const auto back = schema_from(to_json(s));
  EXPECT_EQ(back.joint_names, s.joint_names);
  EXPECT_EQ(back.bones, s.bones);
  EXPECT_EQ(back.alias_weights, s.alias_weights);
  EXPECT_EQ(back.legs, s.legs);
  EXPECT_TRUE(validate_schema(back).empty());
}

TEST(Json, TruthRoundTrip) {
  const auto f = frame(110);
  const nlohmann::json j = nlohmann::json::parse(to_json(f).dump());
  const auto b = truth_from(j);
  EXPECT_EQ(b.theta, f.theta);
  EXPECT_EQ(b.shape.lengths, f.shape.lengths);
  EXPECT_EQ(b.shape.radii, f.shape.radii);
  EXPECT_EQ(b.position.translation, f.position.translation);
  EXPECT_EQ(b.position.rotation.coeffs(), f.position.rotation.coeffs());
  EXPECT_EQ(b.joints2d, f.joints2d);
  EXPECT_EQ(b.joints3d, f.joints3d);
  EXPECT_EQ(b.visibility, f.visibility);
  EXPECT_EQ(b.camera.focal, f.camera.focal);
  EXPECT_EQ(j.at("silhouette_area").get<std::size_t>(), f.silhouette.area());
}

TEST(Json, ProposalsRoundTripAndValidate) {
  const auto f = frame(111);
  Rng rng(112);
  const auto p = corrupt_proposals(f, default_schema(), CorruptionConfig{}, rng);
  const int J = default_schema().joint_count();
  EXPECT_EQ(proposals_from(nlohmann::json::parse(to_json(p).dump()), J), p);
  auto bad = to_json(p);
  for (auto& e : bad["joints"])
    for (auto& q : e["proposals"]) q["conf"] = 1.5;
  EXPECT_THROW(proposals_from(bad, J), ValidationError);
  EXPECT_THROW(proposals_from(to_json(p), J - 1), ValidationError);
}

TEST(Json, PriorsRoundTrip) {
  const auto prior = fit_prior(training_frames(113, 100, quadruped(), pose_limits(), SynthConfig{}),
                               NormalizationKind::kSilhouette, 3.0, 113);
  const auto back = prior_from(nlohmann::json::parse(to_json(prior).dump()));
  EXPECT_EQ(back.mean, prior.mean);
  EXPECT_EQ(back.covariance, prior.covariance);
  EXPECT_EQ(back.normalization, prior.normalization);
  EXPECT_LT((back.inverse - prior.inverse).cwiseAbs().maxCoeff(), 1e-9 * prior.inverse.cwiseAbs().maxCoeff());

  const auto& sp = shape_pose_prior();
  const auto sb = shape_pose_prior_from(nlohmann::json::parse(to_json(sp).dump()));
  EXPECT_EQ(sb.pose.mean, sp.pose.mean);
  EXPECT_EQ(sb.shape.covariance, sp.shape.covariance);
  EXPECT_LT((sb.pose.whitening - sp.pose.whitening).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Json, AssignmentRoundTrip) {
  OjaConfig cfg;
  ProposalSet p;
  p.joints = {{{Vec2(1, 2), 0.5}, {Vec2(3, 4), 0.7}}, {}, {{Vec2(5, 6), 1.0}}};
  const auto f = prepare_frame(p, Silhouette(8, 8, 0), NormalizationKind::kIdentity, cfg);
  const FrameAssignment a{1, 0, 1};
  const auto j = assignment_json(a, f, 12.5, {{"prior", 1.0}});
  EXPECT_EQ(j.at("selected"), nlohmann::json({1, -1, -1}));
  EXPECT_EQ(j.at("null_mask"), nlohmann::json({false, true, true}));
  EXPECT_EQ(assignment_from(j, p), a);
}

TEST(Json, FitParamsRoundTrip) {
  const FitParams p = truth_params(frame(114));
  const auto b = fit_params_from(nlohmann::json::parse(fit_params_json(p).dump()));
  EXPECT_EQ(b.theta, p.theta);
  EXPECT_LT((b.lengths() - p.lengths()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(b.position.translation, p.position.translation);
}

TEST(Json, MissingFileIsIoError) { EXPECT_THROW(read_json("/nonexistent/qoja.json"), IoError); }

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const RunConfig back = config_from(to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, OverridesApply) {
  const auto c = config_from(nlohmann::json::parse(R"({"seed": 7, "oja": {"lambda_null": 3.5}, "fit": {"stage2": {"prior": 0.25}}})"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.oja.lambda_null, 3.5);
  EXPECT_EQ(c.fit.stages[1].prior, 0.25);
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
  EXPECT_EQ(config_hash(config_from(to_json(c))), config_hash(c));
}

TEST(Config, UnknownKeysNameTheirPath) {
  try {
    config_from(nlohmann::json::parse(R"({"oja": {"lamda_null": 3}})"));
    FAIL() << "accepted an unknown key";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("oja.lamda_null"), std::string::npos);
  }
  EXPECT_THROW(config_from(nlohmann::json::parse(R"({"bogus": 1})")), ValidationError);
  EXPECT_THROW(config_from(nlohmann::json::parse(R"({"seed": "x"})")), ValidationError);
  EXPECT_THROW(config_from(nlohmann::json::parse(R"({"oja": {"lambda_null": -1}})")), ValidationError);
}

TEST(Images, SilhouetteRoundTrips) {
  const fs::path dir = scratch("images");
  const auto f = frame(115);
  for (const char* name : {"s.pgm", "s.png"}) {
    const std::string path = (dir / name).string();
    write_silhouette(path, f.silhouette);
    EXPECT_EQ(read_silhouette(path), f.silhouette) << name;
  }
  Image<std::uint8_t> grey(7, 5, 0);
  for (std::size_t i = 0; i < grey.size(); ++i) grey.data()[i] = static_cast<std::uint8_t>(i * 7);
  write_png((dir / "g.png").string(), grey);
  EXPECT_EQ(read_png((dir / "g.png").string()), grey);
  write_pgm((dir / "g.pgm").string(), grey);
  EXPECT_EQ(read_pnm((dir / "g.pgm").string()), grey);
  EXPECT_THROW(read_silhouette((dir / "missing.pgm").string()), IoError);
  fs::remove_all(dir);
}

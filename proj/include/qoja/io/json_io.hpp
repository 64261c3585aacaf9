#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qoja/core/camera.hpp"
#include "qoja/core/model.hpp"
#include "qoja/core/schema.hpp"
#include "qoja/fitter/fit.hpp"
#include "qoja/oja/energy.hpp"
#include "qoja/oja/prior.hpp"
#include "qoja/proposals.hpp"
#include "qoja/synth/generator.hpp"

namespace qoja {

using nlohmann::json;

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

/// Pretty-printed with a trailing newline; keys come out sorted, so equal
/// documents are byte-identical.
inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": field '" + key + "': " + e.what());
  }
}

inline json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json points_json(const Points2& p) {
  json a = json::array();
  for (Eigen::Index j = 0; j < p.cols(); ++j) a.push_back({p(0, j), p(1, j)});
  return a;
}

inline json points_json(const Points3& p) {
  json a = json::array();
  for (Eigen::Index j = 0; j < p.cols(); ++j) a.push_back({p(0, j), p(1, j), p(2, j)});
  return a;
}

template <int R>
Eigen::Matrix<double, R, Eigen::Dynamic> points_from(const json& j) {
  Eigen::Matrix<double, R, Eigen::Dynamic> p(R, j.size());
  for (std::size_t k = 0; k < j.size(); ++k)
    for (int r = 0; r < R; ++r) p(r, static_cast<Eigen::Index>(k)) = j.at(k).at(r).get<double>();
  return p;
}

// ---------------------------------------------------------------- schema

inline json to_json(const SkeletonSchema& s) {
  json j;
  j["joints"] = s.joint_names;
  json aliases = json::array();
  for (int a = 0; a < s.joint_count(); ++a)
    for (int b = 0; b < s.joint_count(); ++b)
      if (s.alias_weights(a, b) != 0.0) aliases.push_back({a, b, s.alias_weights(a, b)});
  j["aliases"] = aliases;
  json bones = json::array();
  for (auto [a, b] : s.bones) bones.push_back({a, b});
  j["bones"] = bones;
  j["torso"] = s.torso_joints;
  static const char* leg_names[4] = {"front_left", "front_right", "back_left", "back_right"};
  json legs;
  for (int l = 0; l < 4; ++l) legs[leg_names[l]] = s.legs[l];
  j["legs"] = legs;
  return j;
}

inline SkeletonSchema schema_from(const json& j) {
  SkeletonSchema s;
  s.joint_names = get_field<std::vector<std::string>>(j, "joints", "schema");
  const int J = s.joint_count();
  s.alias_weights = Eigen::MatrixXd::Zero(J, J);
  for (const auto& a : get_field<json>(j, "aliases", "schema")) {
    const int x = a.at(0).get<int>(), y = a.at(1).get<int>();
    if (x < 0 || y < 0 || x >= J || y >= J) throw ValidationError("schema: alias index out of range");
    s.alias_weights(x, y) = a.at(2).get<double>();
  }
  for (const auto& b : get_field<json>(j, "bones", "schema")) s.bones.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
  s.torso_joints = get_field<std::vector<int>>(j, "torso", "schema");
  static const char* leg_names[4] = {"front_left", "front_right", "back_left", "back_right"};
  const json legs = get_field<json>(j, "legs", "schema");
  for (int l = 0; l < 4; ++l) s.legs[l] = get_field<std::vector<int>>(legs, leg_names[l], "schema legs");
  return s;
}

// ---------------------------------------------------------------- camera, pose

inline json to_json(const CameraModel& c) {
  return {{"focal", c.focal}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

inline CameraModel camera_from(const json& j) {
  CameraModel c;
  c.focal = get_field<double>(j, "focal", "camera");
  c.cx = get_field<double>(j, "cx", "camera");
  c.cy = get_field<double>(j, "cy", "camera");
  c.width = get_field<int>(j, "width", "camera");
  c.height = get_field<int>(j, "height", "camera");
  c.validate();
  return c;
}

inline json to_json(const PositionParams& p) {
  const Quat& q = p.rotation;
  return {{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

inline PositionParams position_from(const json& j) {
  PositionParams p;
  const auto t = get_field<std::vector<double>>(j, "translation", "position");
  const auto q = get_field<std::vector<double>>(j, "rotation_wxyz", "position");
  if (t.size() != 3 || q.size() != 4) throw ValidationError("position: wrong array lengths");
  p.translation = Vec3(t[0], t[1], t[2]);
  p.rotation = Quat(q[0], q[1], q[2], q[3]);
  p.validate();
  return p;
}

inline json shape_json(const ShapeParams& s) { return {{"lengths", vec_json(s.lengths)}, {"radii", vec_json(s.radii)}}; }

inline ShapeParams shape_from(const json& j) {
  return {vec_from(get_field<json>(j, "lengths", "shape")), vec_from(get_field<json>(j, "radii", "shape"))};
}

// ---------------------------------------------------------------- ground truth

inline json to_json(const GroundTruthFrame& f) {
  json j;
  j["theta"] = vec_json(f.theta);
  j["shape"] = shape_json(f.shape);
  j["position"] = to_json(f.position);
  j["camera"] = to_json(f.camera);
  j["joints3d"] = points_json(f.joints3d);
  j["joints2d"] = points_json(f.joints2d);
  j["visibility"] = f.visibility;
  j["silhouette_area"] = f.silhouette.area();
  return j;
}

/// Everything but the silhouette, which lives in its own image file.
inline GroundTruthFrame truth_from(const json& j) {
  GroundTruthFrame f;
  f.theta = vec_from(get_field<json>(j, "theta", "ground truth"));
  f.shape = shape_from(get_field<json>(j, "shape", "ground truth"));
  f.position = position_from(get_field<json>(j, "position", "ground truth"));
  f.camera = camera_from(get_field<json>(j, "camera", "ground truth"));
  f.joints3d = points_from<3>(get_field<json>(j, "joints3d", "ground truth"));
  f.joints2d = points_from<2>(get_field<json>(j, "joints2d", "ground truth"));
  f.visibility = get_field<std::vector<bool>>(j, "visibility", "ground truth");
  return f;
}

// ---------------------------------------------------------------- proposals

inline json to_json(const ProposalSet& s) {
  json joints = json::array();
  for (int j = 0; j < s.joint_count(); ++j) {
    json props = json::array();
    for (const auto& p : s.joints[j])
      props.push_back({{"x", p.position.x()}, {"y", p.position.y()}, {"conf", p.confidence}});
    joints.push_back({{"id", j}, {"proposals", props}});
  }
  return {{"joints", joints}};
}

inline ProposalSet proposals_from(const json& j, int joint_count) {
  ProposalSet s;
  s.joints.resize(joint_count);
  for (const auto& e : get_field<json>(j, "joints", "proposals")) {
    const int id = get_field<int>(e, "id", "proposals");
    if (id < 0 || id >= joint_count) throw ValidationError("proposals: joint id out of range");
    for (const auto& p : get_field<json>(e, "proposals", "proposals")) {
      const double conf = get_field<double>(p, "conf", "proposal");
      if (!(conf > 0.0 && conf <= 1.0)) throw ValidationError("proposals: confidence must be in (0, 1]");
      s.joints[id].push_back({Vec2(get_field<double>(p, "x", "proposal"), get_field<double>(p, "y", "proposal")), conf});
    }
  }
  return s;
}

// ---------------------------------------------------------------- prior

inline json to_json(const SkeletonPrior& p) {
  const Eigen::Index n = p.covariance.rows();
  std::vector<double> cov(static_cast<std::size_t>(n * n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) cov[static_cast<std::size_t>(r * n + c)] = p.covariance(r, c);
  return {{"mean", vec_json(p.mean)},
          {"covariance", cov},
          {"normalization", to_string(p.normalization)},
          {"sample_count", p.sample_count}};
}

inline SkeletonPrior prior_from(const json& j) {
  SkeletonPrior p;
  p.mean = vec_from(get_field<json>(j, "mean", "prior"));
  const auto cov = get_field<std::vector<double>>(j, "covariance", "prior");
  const Eigen::Index n = p.mean.size();
  if (static_cast<Eigen::Index>(cov.size()) != n * n) throw ValidationError("prior: covariance has the wrong size");
  p.covariance.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) p.covariance(r, c) = cov[static_cast<std::size_t>(r * n + c)];
  const std::string norm = get_field<std::string>(j, "normalization", "prior");
  if (norm == "identity")
    p.normalization = NormalizationKind::kIdentity;
  else if (norm == to_string(NormalizationKind::kSilhouette))
    p.normalization = NormalizationKind::kSilhouette;
  else
    throw ValidationError("prior: unknown normalization '" + norm + "'");
  p.sample_count = j.value("sample_count", std::size_t{0});
  p.refresh_inverse();
  return p;
}

// ---------------------------------------------------------------- assignments

inline json assignment_json(const FrameAssignment& a, const OjaFrame& f, double energy, const json& terms) {
  json selected = json::array(), nulls = json::array();
  for (int j = 0; j < f.joint_count(); ++j) {
    const bool is_null = f.is_null(j, a[j]);
    selected.push_back(is_null ? -1 : a[j]);
    nulls.push_back(is_null);
  }
  return {{"selected", selected}, {"null_mask", nulls}, {"energy", energy}, {"terms", terms}};
}

/// Slots from an assignment document; -1 or a set null flag means null.
inline FrameAssignment assignment_from(const json& j, const ProposalSet& proposals) {
  const auto sel = get_field<std::vector<int>>(j, "selected", "assignment");
  const auto nulls = get_field<std::vector<bool>>(j, "null_mask", "assignment");
  if (static_cast<int>(sel.size()) != proposals.joint_count() || nulls.size() != sel.size())
    throw ValidationError("assignment: joint count mismatch");
  FrameAssignment a(sel.size());
  for (std::size_t j = 0; j < sel.size(); ++j) {
    const int n = proposals.count(static_cast<int>(j));
    if (nulls[j] || sel[j] < 0) {
      a[j] = n;
    } else {
      if (sel[j] >= n) throw ValidationError("assignment: proposal index out of range");
      a[j] = sel[j];
    }
  }
  return a;
}

// ---------------------------------------------------------------- fits

inline json to_json(const FitEnergies& e) {
  return {{"sil", e.sil}, {"joints", e.joints}, {"prior", e.prior}, {"lim", e.lim}, {"temp", e.temp}};
}

inline json fit_params_json(const FitParams& p) {
  return {{"phi", to_json(p.position)},
          {"theta", vec_json(p.theta)},
          {"beta", shape_json(p.shape())}};
}

inline FitParams fit_params_from(const json& j) {
  return FitParams::from(vec_from(get_field<json>(j, "theta", "fit")), shape_from(get_field<json>(j, "beta", "fit")),
                         position_from(get_field<json>(j, "phi", "fit")));
}

inline json to_json(const FitResult& r) {
  json j = fit_params_json(r.params);
  j["energies"] = to_json(r.energies);
  json log = json::array();
  for (const auto& s : r.stages)
    log.push_back({{"stage", s.stage},
                   {"iterations", s.iterations},
                   {"start_objective", s.start_objective},
                   {"end_objective", s.end_objective},
                   {"objective_history", s.objective_history},
                   {"energies", to_json(s.energies)}});
  j["stage_log"] = log;
  return j;
}

// ---------------------------------------------------------------- shape/pose prior

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from(const json& j) {
  const Eigen::Index n = static_cast<Eigen::Index>(j.size());
  const Eigen::Index m = n ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != m) throw ValidationError("matrix rows differ in length");
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = j.at(r).at(c).get<double>();
  }
  return out;
}

inline json to_json(const GaussianPrior& g) { return {{"mean", vec_json(g.mean)}, {"covariance", matrix_json(g.covariance)}}; }

inline GaussianPrior gaussian_from(const json& j) {
  GaussianPrior g;
  g.mean = vec_from(get_field<json>(j, "mean", "gaussian prior"));
  g.covariance = matrix_from(get_field<json>(j, "covariance", "gaussian prior"));
  if (g.covariance.rows() != g.mean.size() || g.covariance.cols() != g.mean.size())
    throw ValidationError("gaussian prior: covariance has the wrong size");
  g.refresh();
  return g;
}

inline json to_json(const ShapePosePrior& p) { return {{"shape", to_json(p.shape)}, {"pose", to_json(p.pose)}}; }

inline ShapePosePrior shape_pose_prior_from(const json& j) {
  return {gaussian_from(get_field<json>(j, "shape", "shape/pose prior")),
          gaussian_from(get_field<json>(j, "pose", "shape/pose prior"))};
}

}  // namespace qoja

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qoja/fitter/dogleg.hpp"
#include "qoja/fitter/energies.hpp"
#include "qoja/fitter/params.hpp"

namespace qoja {

/// Per-stage multipliers on each energy.
struct StageWeights {
  double joints = 0.0;
  double prior = 0.0;
  double lim = 0.0;
  double sil = 0.0;
  double temp = 0.0;
  int max_iterations = 50;
};

struct FitConfig {
  // Stage 1 moves only the position, against torso joints.
  std::array<StageWeights, 4> stages = {{
      {1.0, 0.0, 0.0, 0.0, 0.0, 40},
      {1.0, 1.0, 1.0, 0.0, 1.0, 50},
      {0.5, 0.3, 1.0, 1.0, 1.0, 50},
      {0.1, 0.1, 1.0, 1.0, 1.0, 50},
  }};
  // Base scale of each energy, applied on top of the stage weights.
  double joints_scale = 1.0;
  double prior_scale = 1e-3;
  double lim_scale = 10.0;
  double sil_scale = 1.0;
  double temp_scale = 1.0;
  double temp_pose_weight = 0.0;  // extension: also penalise pose change between frames
  double sharpness = 2.0;         // per pixel
  int init_yaw_candidates = 8;
  DoglegConfig dogleg;

  void validate() const {
    for (const auto& s : stages)
      if (!(s.joints >= 0.0 && s.prior >= 0.0 && s.lim >= 0.0 && s.sil >= 0.0 && s.temp >= 0.0) ||
          s.max_iterations < 0)
        throw ValidationError("fit config: stage weights must be non-negative");
    if (!(joints_scale >= 0.0 && prior_scale >= 0.0 && lim_scale >= 0.0 && sil_scale >= 0.0 &&
          temp_scale >= 0.0 && temp_pose_weight >= 0.0))
      throw ValidationError("fit config: energy scales must be non-negative");
    if (!(sharpness > 0.0)) throw ValidationError("fit config: sharpness must be positive");
    if (init_yaw_candidates < 1) throw ValidationError("fit config: need at least one initial yaw");
  }
};

/// Unweighted energies. `lim` is the plain hinge sum.
struct FitEnergies {
  double sil = 0.0;
  double joints = 0.0;
  double prior = 0.0;
  double lim = 0.0;
  double temp = 0.0;
};

struct StageLog {
  int stage = 0;
  int iterations = 0;
  double start_objective = 0.0;
  double end_objective = 0.0;
  std::vector<double> objective_history;
  FitEnergies energies;
};

struct FitResult {
  FitParams params;
  FitEnergies energies;
  std::vector<StageLog> stages;
};

/// Everything a stage objective reads.
struct FitContext {
  const ProxyQuadruped* model = nullptr;
  const PoseParams* limits = nullptr;
  const ShapePosePrior* prior = nullptr;
  const FitObservation* obs = nullptr;
  const FitParams* previous = nullptr;  // enables the temporal term
  const FitConfig* cfg = nullptr;
};

inline FitEnergies fit_energies(const FitContext& ctx, const FitParams& p) {
  FitEnergies e;
  const auto& obs = *ctx.obs;
  e.sil = obs.silhouette.area() > 0 ? e_sil(obs.camera, *ctx.model, p, obs.silhouette, ctx.cfg->sharpness) : 0.0;
  e.joints = e_joints(obs.camera, *ctx.model, p, obs.joints, obs.present, obs.area());
  e.prior = e_prior(p, *ctx.prior);
  e.lim = e_lim(p.theta, *ctx.limits);
  e.temp = ctx.previous ? e_temp(p, *ctx.previous, ctx.cfg->temp_pose_weight) : 0.0;
  return e;
}

/// Stacked weighted residuals of one stage; fills the normal equations when
/// `lin` is given.
inline Eigen::VectorXd stage_residuals(const FitContext& ctx, const StageWeights& w,
                                       const std::vector<bool>& joint_mask, const Eigen::VectorXd& x,
                                       Linearization* lin) {
  const ProxyQuadruped& model = *ctx.model;
  const ParamLayout L = ParamLayout::of(model);
  const FitConfig& cfg = *ctx.cfg;
  const FitParams p = unpack(x, L);
  const bool jac = lin != nullptr;
  FkJacobian fk;
  if (jac) {
    fk = fk_with_jacobian(model, p);
  } else {
    fk.joints = forward_kinematics(shaped_model(model, p), p.theta, p.position);
  }
  if (!(fk.joints.row(2).minCoeff() > 1e-6)) {
    if (jac) throw GeometryError("model is behind the camera");
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  }
  if (jac) {
    lin->jtj = Eigen::MatrixXd::Zero(L.size(), L.size());
    lin->jtr = Eigen::VectorXd::Zero(L.size());
  }
  std::vector<Eigen::VectorXd> parts;
  auto add = [&](const ResidualBlock& b, double weight) {
    const double s = std::sqrt(weight);
    parts.push_back(s * b.r);
    if (jac && b.r.size() > 0) {
      lin->jtj.noalias() += weight * b.J.transpose() * b.J;
      lin->jtr.noalias() += weight * b.J.transpose() * b.r;
    }
  };
  const double wj = w.joints * cfg.joints_scale, wp = w.prior * cfg.prior_scale, wl = w.lim * cfg.lim_scale;
  const double ws = w.sil * cfg.sil_scale, wt = w.temp * cfg.temp_scale;
  if (wj > 0.0) add(joints_residual(ctx.obs->camera, fk, ctx.obs->joints, joint_mask, ctx.obs->area(), jac), wj);
  if (wp > 0.0) add(prior_residual(p, *ctx.prior, L, jac), wp);
  if (wl > 0.0) add(lim_residual(p.theta, *ctx.limits, L, jac), wl);
  if (wt > 0.0 && ctx.previous) add(temp_residual(p, *ctx.previous, L, cfg.temp_pose_weight, jac), wt);
  if (ws > 0.0 && ctx.obs->silhouette.area() > 0) {
    const Eigen::VectorXd r = sil_residual(ctx.obs->camera, model, p, fk, ctx.obs->silhouette, cfg.sharpness, ws, lin);
    parts.push_back(std::sqrt(ws) * r);
  }
  Eigen::Index n = 0;
  for (const auto& v : parts) n += v.size();
  Eigen::VectorXd r(n);
  n = 0;
  for (const auto& v : parts) {
    r.segment(n, v.size()) = v;
    n += v.size();
  }
  if (jac) lin->residual = r;
  return r;
}

/// Least-squares problem over the `active` coordinates of the flat vector,
/// the rest held at `base`.
inline LeastSquaresProblem stage_problem(const FitContext& ctx, const StageWeights& w,
                                         const std::vector<bool>& joint_mask, const Eigen::VectorXd& base,
                                         const std::vector<int>& active) {
  auto expand = [base, active](const Eigen::VectorXd& z) {
    Eigen::VectorXd x = base;
    for (std::size_t i = 0; i < active.size(); ++i) x[active[i]] = z[i];
    return x;
  };
  LeastSquaresProblem prob;
  prob.residuals = [=](const Eigen::VectorXd& z) {
    try {
      return stage_residuals(ctx, w, joint_mask, expand(z), nullptr);
    } catch (const GeometryError&) {
      return Eigen::VectorXd(Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity()));
    }
  };
  prob.linearize = [=](const Eigen::VectorXd& z) {
    Linearization full;
    stage_residuals(ctx, w, joint_mask, expand(z), &full);
    Linearization out;
    const Eigen::Index n = static_cast<Eigen::Index>(active.size());
    out.jtj.resize(n, n);
    out.jtr.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.jtr[i] = full.jtr[active[i]];
      for (Eigen::Index k = 0; k < n; ++k) out.jtj(i, k) = full.jtj(active[i], active[k]);
    }
    out.residual = std::move(full.residual);
    return out;
  };
  prob.retract = [expand, active](const Eigen::VectorXd& z, const Eigen::VectorXd& dz) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(expand(z).size());
    for (std::size_t i = 0; i < active.size(); ++i) dx[active[i]] = dz[i];
    const Eigen::VectorXd x = retract(expand(z), dx);
    Eigen::VectorXd out(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) out[i] = x[active[i]];
    return out;
  };
  return prob;
}

inline StageLog run_stage(const FitContext& ctx, int stage, FitParams& params) {
  const FitConfig& cfg = *ctx.cfg;
  const StageWeights& w = cfg.stages[stage];
  const ProxyQuadruped& model = *ctx.model;
  const ParamLayout L = ParamLayout::of(model);
  const int J = model.joint_count();
  std::vector<bool> mask = ctx.obs->present;
  std::vector<int> active;
  if (stage == 0) {
    for (int j = 0; j < J; ++j)
      mask[j] = mask[j] && std::find(model.schema.torso_joints.begin(), model.schema.torso_joints.end(), j) !=
                               model.schema.torso_joints.end();
    for (int i = 0; i < 6; ++i) active.push_back(i);
  } else {
    for (int i = 0; i < L.size(); ++i) active.push_back(i);
  }
  const Eigen::VectorXd base = pack(params, L);
  Eigen::VectorXd z(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) z[i] = base[active[i]];
  const LeastSquaresProblem prob = stage_problem(ctx, w, mask, base, active);

  DoglegConfig dcfg = cfg.dogleg;
  dcfg.max_iterations = w.max_iterations;
  const DoglegResult res = dogleg_minimize(prob, z, dcfg);
  Eigen::VectorXd x = base;
  for (std::size_t i = 0; i < active.size(); ++i) x[active[i]] = res.x[i];
  params = unpack(x, L);

  StageLog log;
  log.stage = stage + 1;
  log.iterations = res.iterations;
  for (double c : res.cost_history) log.objective_history.push_back(2.0 * c);
  log.start_objective = log.objective_history.front();
  log.end_objective = 2.0 * res.cost;
  log.energies = fit_energies(ctx, params);
  return log;
}

/// Template shape, mean pose, body upright, facing `yaw` about the vertical,
/// placed so the present torso joints (or the silhouette) fill their span.
inline FitParams initial_guess(const FitObservation& obs, const ProxyQuadruped& model, const ShapePosePrior& prior,
                               double yaw) {
  const ParamLayout L = ParamLayout::of(model);
  FitParams p;
  p.theta = prior.pose.mean;
  p.log_lengths = prior.shape.mean.head(L.bone_count);
  p.log_radii = prior.shape.mean.tail(L.bone_count);
  // Model +y is up; camera +y is down.
  p.position.rotation = (Quat(Eigen::AngleAxisd(kPi, Vec3::UnitX())) * Quat(Eigen::AngleAxisd(yaw, Vec3::UnitY())))
                            .normalized();
  const Points3 rest = forward_kinematics(shaped_model(model, p), p.theta, PositionParams{});
  const double extent3d = (rest.rowwise().maxCoeff() - rest.rowwise().minCoeff()).norm();
  std::vector<Vec2> pts;
  for (int j = 0; j < model.joint_count(); ++j)
    if (obs.present[j]) pts.push_back(obs.joints.col(j));
  Vec2 centre;
  double extent2d;
  if (pts.size() >= 3) {
    Vec2 lo = pts[0], hi = pts[0];
    centre.setZero();
    for (const auto& q : pts) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
      centre += q;
    }
    centre /= static_cast<double>(pts.size());
    extent2d = (hi - lo).norm();
  } else {
    if (obs.silhouette.area() == 0) throw GeometryError("fit: no joints and an empty silhouette");
    centre = obs.silhouette.centroid();
    extent2d = 2.0 * std::sqrt(static_cast<double>(obs.silhouette.area()));
  }
  const double depth = obs.camera.focal * extent3d / std::max(extent2d, 1.0);
  p.position.translation = obs.camera.back_project(centre, depth);
  return p;
}

inline void check_observation(const FitObservation& obs, const ProxyQuadruped& model) {
  if (static_cast<int>(obs.present.size()) != model.joint_count() || obs.joints.cols() != model.joint_count())
    throw ArgumentError("fit: observation joint count does not match the model");
  if (obs.silhouette.width() != obs.camera.width || obs.silhouette.height() != obs.camera.height)
    throw ArgumentError("fit: silhouette resolution does not match the camera");
  const bool any = std::any_of(obs.present.begin(), obs.present.end(), [](bool b) { return b; });
  if (!any && obs.silhouette.area() == 0) throw GeometryError("fit: all joints are null and the silhouette is empty");
}

/// Staged fit of one frame. Without `init`, the first stage is tried from
/// several yaw angles and the best is kept. `first_stage` is 0-based.
inline FitResult fit_frame(const FitObservation& obs, const std::optional<FitParams>& init,
                           const ProxyQuadruped& model, const PoseParams& limits, const ShapePosePrior& prior,
                           const FitConfig& cfg = {}, const FitParams* previous = nullptr, int first_stage = 0) {
  cfg.validate();
  check_observation(obs, model);
  FitContext ctx{&model, &limits, &prior, &obs, previous, &cfg};
  FitResult out;
  FitParams params;
  if (init) {
    params = *init;
    if (first_stage == 0) out.stages.push_back(run_stage(ctx, 0, params));
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.init_yaw_candidates; ++k) {
      FitParams cand = initial_guess(obs, model, prior, 2.0 * kPi * k / cfg.init_yaw_candidates);
      StageLog log = run_stage(ctx, 0, cand);
      if (log.end_objective < best) {
        best = log.end_objective;
        params = cand;
        if (out.stages.empty()) out.stages.push_back(log);
        else out.stages[0] = log;
      }
    }
  }
  for (int s = std::max(1, first_stage); s < 4; ++s) out.stages.push_back(run_stage(ctx, s, params));
  out.params = params;
  out.energies = fit_energies(ctx, params);
  return out;
}

/// Frame 0 runs the full schedule; later frames start from the previous
/// result, run stages 2-4 and add the temporal term.
inline std::vector<FitResult> fit_sequence(const std::vector<FitObservation>& frames,
                                           const std::optional<FitParams>& init, const ProxyQuadruped& model,
                                           const PoseParams& limits, const ShapePosePrior& prior,
                                           const FitConfig& cfg = {}) {
  if (frames.empty()) throw ArgumentError("fit_sequence: need at least one frame");
  std::vector<FitResult> out;
  out.push_back(fit_frame(frames[0], init, model, limits, prior, cfg));
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const FitParams prev = out.back().params;
    out.push_back(fit_frame(frames[t], prev, model, limits, prior, cfg, &prev, 1));
  }
  return out;
}

}  // namespace qoja

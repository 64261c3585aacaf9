#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qoja/eval/report.hpp"
#include "qoja/fitter/fit.hpp"
#include "qoja/imageops/medial_axis.hpp"
#include "qoja/io/config.hpp"
#include "qoja/io/draw.hpp"
#include "qoja/io/image_io.hpp"
#include "qoja/io/json_io.hpp"
#include "qoja/oja/ga.hpp"
#include "qoja/oja/training.hpp"

namespace qoja::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- layout

inline std::string sequence_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "seq%03d", i);
  return buf;
}

inline std::string frame_stem(int t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "frame%03d", t);
  return buf;
}

struct SequenceEntry {
  std::string id;
  int frames = 0;
};

/// Completion marker of every command's output directory.
struct Manifest {
  std::string kind;  // dataset, oja or fit
  std::string method;
  std::string dataset;      // dataset directory an oja or fit output derives from
  std::string assignments;  // oja directory a fit derives from
  std::vector<SequenceEntry> sequences;
  std::uint64_t seed = 0;
  std::string config_hash;
};

inline json to_json(const Manifest& m) {
  json seqs = json::array();
  for (const auto& s : m.sequences) seqs.push_back({{"id", s.id}, {"frames", s.frames}});
  json j = {{"kind", m.kind}, {"sequences", seqs}, {"seed", m.seed}, {"config_hash", m.config_hash}};
  if (!m.method.empty()) j["method"] = m.method;
  if (!m.dataset.empty()) j["dataset"] = m.dataset;
  if (!m.assignments.empty()) j["assignments"] = m.assignments;
  return j;
}

inline Manifest read_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  if (!fs::exists(p))
    throw IoError("no manifest.json in " + dir.string() + " (missing or incomplete output directory)");
  const json j = read_json(p.string());
  Manifest m;
  m.kind = get_field<std::string>(j, "kind", "manifest");
  m.method = j.value("method", std::string());
  m.dataset = j.value("dataset", std::string());
  m.assignments = j.value("assignments", std::string());
  m.seed = j.value("seed", std::uint64_t{0});
  m.config_hash = j.value("config_hash", std::string());
  for (const auto& s : get_field<json>(j, "sequences", "manifest"))
    m.sequences.push_back({get_field<std::string>(s, "id", "manifest"), get_field<int>(s, "frames", "manifest")});
  return m;
}

inline void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  fs::remove(dir / "manifest.json", ec);
}

inline fs::path absolute_path(const fs::path& p) { return fs::weakly_canonical(fs::absolute(p)); }

// ---------------------------------------------------------------- config

struct CommonOptions {
  std::string config;             // JSON file; empty means defaults
  std::optional<std::uint64_t> seed;
  std::string workspace;          // overrides config and environment
};

inline fs::path workspace_of(const RunConfig& cfg, const CommonOptions& o) {
  if (!o.workspace.empty()) return o.workspace;
  if (!cfg.workspace.empty()) return cfg.workspace;
  if (const char* env = std::getenv("QOJA_WORKSPACE"); env && *env) return env;
  return ".";
}

/// --config if given, else `fallback`/config.json if present, else defaults;
/// --seed wins over any of them.
inline RunConfig load_config(const CommonOptions& o, const fs::path& fallback = {}) {
  RunConfig cfg;
  if (!o.config.empty())
    cfg = config_from(read_json(o.config));
  else if (!fallback.empty() && fs::exists(fallback / "config.json"))
    cfg = config_from(read_json((fallback / "config.json").string()));
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

inline fs::path default_path(const std::string& given, const RunConfig& cfg, const CommonOptions& o,
                             const char* name) {
  return given.empty() ? workspace_of(cfg, o) / name : fs::path(given);
}

// ---------------------------------------------------------------- priors

struct TrainedPriors {
  SkeletonPrior joints;
  ShapePosePrior shape_pose;
};

inline TrainedPriors train_priors(const RunConfig& cfg, const ProxyQuadruped& model, const PoseParams& limits) {
  const auto frames = training_frames(derive_seed(cfg.seed, "prior"), cfg.prior.training_frames, model, limits, cfg.synth);
  TrainedPriors p;
  p.joints = fit_prior(frames, cfg.prior.kind(), cfg.prior.jitter_px, derive_seed(cfg.seed, "prior"));
  p.shape_pose = fit_shape_pose_prior(derive_seed(cfg.seed, "shape-pose"), cfg.prior.shape_pose_sequences,
                                      cfg.prior.shape_pose_frames, model, limits, cfg.synth.shape_pose,
                                      cfg.synth.animation, cfg.prior.shape_pose_shrinkage);
  return p;
}

inline void write_priors(const fs::path& dir, const TrainedPriors& p) {
  write_json((dir / "prior.json").string(), to_json(p.joints));
  write_json((dir / "shape_pose_prior.json").string(), to_json(p.shape_pose));
}

inline SkeletonPrior read_joint_prior(const fs::path& dataset) {
  const fs::path p = dataset / "prior.json";
  if (!fs::exists(p))
    throw Error("missing_prior", "no prior file at " + p.string() + "; run 'qoja synth' or 'qoja prior' first");
  return prior_from(read_json(p.string()));
}

inline ShapePosePrior read_shape_pose_prior(const fs::path& dataset) {
  const fs::path p = dataset / "shape_pose_prior.json";
  if (!fs::exists(p))
    throw Error("missing_prior", "no prior file at " + p.string() + "; run 'qoja synth' or 'qoja prior' first");
  return shape_pose_prior_from(read_json(p.string()));
}

// ---------------------------------------------------------------- dataset access

struct DatasetFrame {
  GroundTruthFrame truth;  // includes the silhouette
  ProposalSet proposals;
};

inline DatasetFrame read_dataset_frame(const fs::path& seq_dir, int t, int joint_count) {
  const std::string stem = frame_stem(t);
  DatasetFrame f;
  const fs::path gt = seq_dir / (stem + ".gt.json");
  if (fs::exists(gt)) f.truth = truth_from(read_json(gt.string()));
  else f.truth.camera = camera_from(read_json((seq_dir / "camera.json").string()));
  f.truth.silhouette = read_silhouette((seq_dir / (stem + ".sil.pgm")).string());
  if (f.truth.silhouette.width() != f.truth.camera.width || f.truth.silhouette.height() != f.truth.camera.height)
    throw ValidationError(stem + ": silhouette size does not match the camera");
  f.proposals = proposals_from(read_json((seq_dir / (stem + ".proposals.json")).string()), joint_count);
  return f;
}

inline SkeletonSchema read_schema(const fs::path& dataset) {
  const fs::path p = dataset / "schema.json";
  if (!fs::exists(p)) return default_schema();
  SkeletonSchema s = schema_from(read_json(p.string()));
  const auto problems = validate_schema(s);
  if (!problems.empty()) throw ValidationError("schema.json: " + problems.front());
  return s;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  CommonOptions common;
  std::optional<int> frames;
  std::optional<int> sequences;
  std::string out;
  bool heatmaps = false;
};

inline fs::path cmd_synth(const SynthOptions& o) {
  RunConfig cfg = load_config(o.common);
  if (o.frames) cfg.dataset.frames = *o.frames;
  if (o.sequences) cfg.dataset.sequences = *o.sequences;
  if (o.heatmaps) cfg.dataset.heatmaps = true;
  cfg.validate();
  const fs::path out = default_path(o.out, cfg, o.common, "data");
  make_output_dir(out);
  const ProxyQuadruped model = default_quadruped();
  const PoseParams limits = default_pose(model);
  write_json((out / "config.json").string(), to_json(cfg));
  write_json((out / "schema.json").string(), to_json(model.schema));

  Manifest man{"dataset", "", "", "", {}, cfg.seed, config_hash(cfg)};
  for (int i = 0; i < cfg.dataset.sequences; ++i) {
    const SyntheticSequence seq = generate_sequence(cfg.seed, i, cfg.dataset.frames, model, limits, cfg.synth);
    const fs::path dir = out / sequence_id(i);
    make_output_dir(dir);
    write_json((dir / "camera.json").string(), to_json(seq.frames.front().camera));
    for (int t = 0; t < cfg.dataset.frames; ++t) {
      const auto& f = seq.frames[t];
      const std::string stem = frame_stem(t);
      write_pgm((dir / (stem + ".sil.pgm")).string(), to_grey(f.silhouette));
      write_json((dir / (stem + ".gt.json")).string(), to_json(f));
      write_json((dir / (stem + ".proposals.json")).string(), to_json(seq.proposals[t]));
      if (cfg.dataset.heatmaps) {
        const auto maps = encode_heatmaps(f.joints2d, model.schema.alias_weights, cfg.synth.heatmap_sigma,
                                          f.camera.width, f.camera.height);
        write_png((dir / (stem + ".heatmaps.png")).string(), mosaic(maps, 5));
      }
    }
    man.sequences.push_back({sequence_id(i), cfg.dataset.frames});
  }
  write_priors(out, train_priors(cfg, model, limits));
  write_json((out / "manifest.json").string(), to_json(man));
  return out;
}

// ---------------------------------------------------------------- prior

struct PriorOptions {
  CommonOptions common;
  std::string out;
};

/// Retrains both prior files into an existing (or new) directory.
inline fs::path cmd_prior(const PriorOptions& o) {
  const RunConfig cfg = load_config(o.common);
  const fs::path out = default_path(o.out, cfg, o.common, "data");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
  const ProxyQuadruped model = default_quadruped();
  write_priors(out, train_priors(cfg, model, default_pose(model)));
  write_json((out / "prior.config.json").string(), to_json(cfg));
  return out;
}

// ---------------------------------------------------------------- oja

struct OjaOptions {
  CommonOptions common;
  std::string method = "ga";
  std::string in;
  std::string out;
};

inline json terms_json(const EnergyTerms& e) {
  return {{"prior", e.prior}, {"conf", e.conf}, {"temp", e.temp}, {"cov_sil", e.cov_sil}, {"cov_bone", e.cov_bone}};
}

inline Assignment solve_method(const std::string& method, const EnergyModel& model, const OjaConfig& cfg,
                               std::uint64_t seed) {
  if (method == "raw") return max_confidence_assignment(model.sequence());
  if (method == "brute") return brute_force(model).first;
  const QpSolution qp = solve_qp(model.qp(), model.sequence(), cfg, seed);
  if (method == "qp") return qp.assignment;
  if (method == "ga") return solve_ga(model, cfg, seed, {qp.assignment}).assignment;
  throw ArgumentError("unknown method '" + method + "' (expected raw, qp, ga or brute)");
}

inline fs::path cmd_oja(const OjaOptions& o) {
  const CommonOptions& c = o.common;
  RunConfig probe = load_config(c);
  const fs::path in = default_path(o.in, probe, c, "data");
  const RunConfig cfg = load_config(c, in);
  if (o.method != "raw" && o.method != "qp" && o.method != "ga" && o.method != "brute")
    throw ArgumentError("unknown method '" + o.method + "' (expected raw, qp, ga or brute)");
  const Manifest data = read_manifest(in);
  if (data.kind != "dataset") throw ArgumentError(in.string() + " is not a dataset directory");
  const SkeletonPrior prior = read_joint_prior(in);
  const SkeletonSchema schema = read_schema(in);
  if (prior.joint_count() != schema.joint_count()) throw ValidationError("prior and schema joint counts differ");
  const fs::path out = default_path(o.out, cfg, c, ("oja-" + o.method).c_str());
  make_output_dir(out);
  write_json((out / "config.json").string(), to_json(cfg));

  Manifest man{"oja", o.method, absolute_path(in).string(), "", {}, cfg.seed, config_hash(cfg)};
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    const auto& entry = data.sequences[i];
    const fs::path src = in / entry.id;
    std::vector<ProposalSet> props;
    std::vector<Silhouette> sils;
    for (int t = 0; t < entry.frames; ++t) {
      DatasetFrame f = read_dataset_frame(src, t, schema.joint_count());
      props.push_back(std::move(f.proposals));
      sils.push_back(std::move(f.truth.silhouette));
    }
    const OjaSequence seq = prepare_sequence(props, sils, prior.normalization, cfg.oja);
    const EnergyModel model(seq, prior, cfg.oja, schema.bones);
    const Assignment A = solve_method(o.method, model, cfg.oja, derive_seed(cfg.seed, "oja", i));
    const fs::path dir = out / entry.id;
    make_output_dir(dir);
    for (int t = 0; t < entry.frames; ++t) {
      const EnergyTerms e = energy_terms({A[t]}, {seq[t]}, prior, cfg.oja, schema.bones);
      write_json((dir / (frame_stem(t) + ".assign.json")).string(),
                 assignment_json(A[t], seq[t], e.total(), terms_json(e)));
    }
    const EnergyTerms total = energy_terms(A, seq, prior, cfg.oja, schema.bones);
    write_json((dir / "summary.json").string(), {{"method", o.method},
                                                 {"frames", entry.frames},
                                                 {"energy", model.energy(A)},
                                                 {"terms", terms_json(total)}});
    man.sequences.push_back(entry);
  }
  write_json((out / "manifest.json").string(), to_json(man));
  return out;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  CommonOptions common;
  std::string in;
  std::string out;
  bool init_gt = false;
  bool overlay = false;
  std::optional<int> max_frames;
  std::optional<int> max_sequences;
};

inline Points2 fitted_joints2d(const ProxyQuadruped& model, const FitParams& p, const CameraModel& cam) {
  return project_joints(cam, forward_kinematics(shaped_model(model, p), p.theta, p.position));
}

/// Silhouette (grey), model boundary (red), observed joints (blue), fitted
/// skeleton (green).
inline RgbImage fit_overlay(const FitObservation& obs, const ProxyQuadruped& model, const FitParams& p,
                            double sharpness) {
  RgbImage img = silhouette_canvas(obs.silhouette);
  const FloatImage soft = soft_render(obs.camera, model, p, sharpness);
  Silhouette mask(soft.width(), soft.height(), 0);
  for (std::size_t i = 0; i < soft.size(); ++i) mask.data()[i] = soft.data()[i] >= 0.5 ? 1 : 0;
  for (auto [x, y] : boundary_pixels(mask)) put(img, x, y, kRed);
  const Points2 q = fitted_joints2d(model, p, obs.camera);
  for (int b = 0; b < model.bone_count(); ++b)
    draw_line(img, q.col(model.topology.bone_parent[b]), q.col(model.topology.bone_child[b]), kGreen);
  for (int j = 0; j < model.joint_count(); ++j) {
    draw_disc(img, q.col(j), 1.5, kGreen);
    if (obs.present[j]) draw_disc(img, obs.joints.col(j), 2.0, kBlue);
  }
  return img;
}

inline fs::path cmd_fit(const FitOptions& o) {
  const CommonOptions& c = o.common;
  RunConfig probe = load_config(c);
  const fs::path in = default_path(o.in, probe, c, "oja-ga");
  const RunConfig cfg = load_config(c, in);
  if (!fs::exists(in / "manifest.json"))
    throw Error("missing_assignments", "no assignments in " + in.string() + "; run 'qoja oja' first");
  const Manifest assign = read_manifest(in);
  if (assign.kind != "oja")
    throw Error("missing_assignments", in.string() + " does not hold assignments; run 'qoja oja' first");
  const fs::path data = assign.dataset;
  const ShapePosePrior prior = read_shape_pose_prior(data);
  const SkeletonSchema schema = read_schema(data);
  const ProxyQuadruped model = default_quadruped();
  if (schema.joint_count() != model.joint_count()) throw ValidationError("dataset schema does not match the proxy model");
  const PoseParams limits = default_pose(model);
  const fs::path out = default_path(o.out, cfg, c, "fit");
  make_output_dir(out);
  write_json((out / "config.json").string(), to_json(cfg));

  Manifest man{"fit", "fit", assign.dataset, absolute_path(in).string(), {}, cfg.seed, config_hash(cfg)};
  const int nseq = std::min<int>(static_cast<int>(assign.sequences.size()),
                                 o.max_sequences.value_or(static_cast<int>(assign.sequences.size())));
  for (int i = 0; i < nseq; ++i) {
    const auto& entry = assign.sequences[i];
    const int frames = std::min(entry.frames, o.max_frames.value_or(entry.frames));
    std::vector<FitObservation> obs;
    std::optional<FitParams> init;
    for (int t = 0; t < frames; ++t) {
      const std::string stem = frame_stem(t);
      const fs::path afile = in / entry.id / (stem + ".assign.json");
      if (!fs::exists(afile)) throw Error("missing_assignments", "missing " + afile.string());
      DatasetFrame f = read_dataset_frame(data / entry.id, t, model.joint_count());
      const FrameAssignment a = assignment_from(read_json(afile.string()), f.proposals);
      FitObservation ob;
      ob.camera = f.truth.camera;
      ob.silhouette = std::move(f.truth.silhouette);
      ob.joints = Points2::Zero(2, model.joint_count());
      ob.present.assign(model.joint_count(), false);
      for (int j = 0; j < model.joint_count(); ++j)
        if (a[j] < f.proposals.count(j)) {
          ob.joints.col(j) = f.proposals.joints[j][a[j]].position;
          ob.present[j] = true;
        }
      if (t == 0 && o.init_gt) {
        if (f.truth.theta.size() == 0) throw IoError("--init-gt: no ground truth for " + entry.id);
        init = FitParams::from(f.truth.theta, f.truth.shape, f.truth.position);
      }
      obs.push_back(std::move(ob));
    }
    const auto results = fit_sequence(obs, init, model, limits, prior, cfg.fit);
    const fs::path dir = out / entry.id;
    make_output_dir(dir);
    FitEnergies mean;
    for (int t = 0; t < frames; ++t) {
      json j = to_json(results[t]);
      j["joints2d"] = points_json(fitted_joints2d(model, results[t].params, obs[t].camera));
      write_json((dir / (frame_stem(t) + ".fit.json")).string(), j);
      if (o.overlay)
        write_png((dir / (frame_stem(t) + ".overlay.png")).string(),
                  fit_overlay(obs[t], model, results[t].params, cfg.fit.sharpness));
      const auto& e = results[t].energies;
      mean.sil += e.sil / frames;
      mean.joints += e.joints / frames;
      mean.prior += e.prior / frames;
      mean.lim += e.lim / frames;
      mean.temp += e.temp / frames;
    }
    write_json((dir / "summary.json").string(), {{"frames", frames}, {"mean_energies", to_json(mean)}});
    man.sequences.push_back({entry.id, frames});
  }
  write_json((out / "manifest.json").string(), to_json(man));
  return out;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  CommonOptions common;
  std::vector<std::string> in;
  std::string out;
};

struct EvalInput {
  fs::path dir;
  Manifest manifest;
  std::string name;
};

inline fs::path dataset_of(const EvalInput& e) {
  return e.manifest.kind == "dataset" ? absolute_path(e.dir) : absolute_path(e.manifest.dataset);
}

inline EvalReport evaluate(const std::vector<EvalInput>& inputs, const RunConfig& cfg) {
  if (inputs.empty()) throw ArgumentError("eval: need at least one input directory");
  const fs::path data = dataset_of(inputs.front());
  for (const auto& e : inputs)
    if (dataset_of(e) != data)
      throw ValidationError("eval: inputs derive from different datasets (" + data.string() + ", " +
                            dataset_of(e).string() + ")");
  std::set<std::string> all;
  for (const auto& e : inputs)
    for (const auto& s : e.manifest.sequences) all.insert(s.id);
  std::string missing;
  for (const auto& e : inputs) {
    std::set<std::string> mine;
    for (const auto& s : e.manifest.sequences) mine.insert(s.id);
    for (const auto& id : all)
      if (!mine.count(id)) missing += " " + id + " (absent from " + e.dir.string() + ")";
  }
  if (!missing.empty()) throw Error("mismatch", "eval: mismatched sequence ids:" + missing);

  const SkeletonSchema schema = read_schema(data);
  const ProxyQuadruped model = default_quadruped();
  const PckConfig& pcfg = cfg.pck;
  EvalReport r;
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  r.alpha = pcfg.alpha;
  r.joint_names = schema.joint_names;
  for (const auto& e : inputs) r.methods.push_back(e.name);
  const int M = static_cast<int>(inputs.size());
  for (const auto& entry : inputs.front().manifest.sequences) {
    SequenceScore s(entry.id, M, schema.joint_count());
    for (int m = 0; m < M; ++m) {
      const EvalInput& e = inputs[m];
      int frames = 0;
      for (const auto& q : e.manifest.sequences)
        if (q.id == entry.id) frames = q.frames;
      if (e.manifest.kind == "oja") {
        const json sum = read_json((e.dir / entry.id / "summary.json").string());
        s.energy[m] = get_field<double>(sum, "energy", "summary");
      }
      for (int t = 0; t < frames; t += pcfg.frame_stride) {
        const DatasetFrame f = read_dataset_frame(data / entry.id, t, schema.joint_count());
        const GroundTruthFrame& gt = f.truth;
        if (gt.theta.size() == 0) throw IoError("eval: no ground truth for " + entry.id + "/" + frame_stem(t));
        Points2 pred = gt.joints2d;
        std::vector<bool> present(schema.joint_count(), true);
        std::optional<double> err;
        if (e.manifest.kind == "dataset") {
          err = joint3d_error(FitParams::from(gt.theta, gt.shape, gt.position),
                              FitParams::from(gt.theta, gt.shape, gt.position), model);
        } else if (e.manifest.kind == "oja") {
          const FrameAssignment a =
              assignment_from(read_json((e.dir / entry.id / (frame_stem(t) + ".assign.json")).string()), f.proposals);
          for (int j = 0; j < schema.joint_count(); ++j) {
            present[j] = a[j] < f.proposals.count(j);
            pred.col(j) = present[j] ? f.proposals.joints[j][a[j]].position : Vec2::Zero();
          }
        } else if (e.manifest.kind == "fit") {
          const FitParams p = fit_params_from(read_json((e.dir / entry.id / (frame_stem(t) + ".fit.json")).string()));
          pred = fitted_joints2d(model, p, gt.camera);
          err = joint3d_error(p, FitParams::from(gt.theta, gt.shape, gt.position), model);
        } else {
          throw ValidationError("eval: unknown input kind '" + e.manifest.kind + "'");
        }
        s.add(t / pcfg.frame_stride, m, pred, present, gt, pcfg);
        if (err) {
          s.joint3d_sum[m] += *err;
          ++s.joint3d_frames[m];
        }
      }
    }
    r.sequences.push_back(std::move(s));
  }
  r.recompute_totals();
  return r;
}

inline fs::path cmd_eval(const EvalOptions& o) {
  const CommonOptions& c = o.common;
  if (o.in.empty()) throw ArgumentError("eval: need at least one --in directory");
  const RunConfig cfg = load_config(c, o.in.front());
  std::vector<EvalInput> inputs;
  std::map<std::string, int> used;
  for (const auto& d : o.in) {
    EvalInput e{d, read_manifest(d), ""};
    std::string name = e.manifest.kind == "dataset" ? "gt" : e.manifest.kind == "fit" ? "fit" : e.manifest.method;
    if (used[name]++) name += "#" + std::to_string(used[name]);
    e.name = name;
    inputs.push_back(std::move(e));
  }
  const EvalReport r = evaluate(inputs, cfg);
  const fs::path out = default_path(o.out, cfg, c, "report");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
  write_json((out / "report.json").string(), to_json(r));
  std::ofstream txt(out / "report.txt");
  if (!txt) throw IoError("cannot write " + (out / "report.txt").string());
  txt << to_text(r);
  return out;
}

// ---------------------------------------------------------------- render

struct RenderOptions {
  std::vector<std::string> frames;
  std::string out;
  double heatmap_sigma = 4.0;
};

inline std::string strip_suffix(const std::string& name) {
  for (const char* s : {".sil.pgm", ".sil.png", ".gt.json", ".pgm", ".pbm", ".png"})
    if (ends_with(name, s)) return name.substr(0, name.size() - std::string(s).size());
  return name;
}

inline RgbImage mat_overlay(const Silhouette& sil, const MatPointSet& mat) {
  RgbImage img = silhouette_canvas(sil);
  for (const auto& p : mat.points) put(img, static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())), kYellow);
  return img;
}

inline RgbImage skeleton_overlay(const Silhouette& sil, const Points2& joints, const std::vector<Bone>& bones) {
  RgbImage img = silhouette_canvas(sil);
  for (auto [a, b] : bones) draw_line(img, joints.col(a), joints.col(b), kGreen);
  for (Eigen::Index j = 0; j < joints.cols(); ++j) draw_disc(img, joints.col(j), 1.5, kRed);
  return img;
}

/// Writes debug images for each input; returns the files written.
inline std::vector<fs::path> cmd_render(const RenderOptions& o) {
  if (o.frames.empty()) throw ArgumentError("render: need at least one --frame");
  const fs::path out = o.out.empty() ? fs::path("render") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& p) { written.push_back(p); };
  for (const auto& file : o.frames) {
    if (!fs::exists(file)) throw IoError("render: no such file " + file);
    const fs::path src(file);
    const std::string stem = strip_suffix(src.filename().string());
    if (ends_with(file, ".gt.json")) {
      const GroundTruthFrame gt = truth_from(read_json(file));
      const fs::path dataset = src.parent_path().parent_path();
      const SkeletonSchema schema = fs::exists(dataset / "schema.json") ? read_schema(dataset) : default_schema();
      const auto maps =
          encode_heatmaps(gt.joints2d, schema.alias_weights, o.heatmap_sigma, gt.camera.width, gt.camera.height);
      emit(out / (stem + ".heatmaps.png"));
      write_png(written.back().string(), mosaic(maps, 5));
      const fs::path sil_file = src.parent_path() / (stem + ".sil.pgm");
      const Silhouette sil = fs::exists(sil_file) ? read_silhouette(sil_file.string())
                                                  : Silhouette(gt.camera.width, gt.camera.height, 0);
      emit(out / (stem + ".skeleton.png"));
      write_png(written.back().string(), skeleton_overlay(sil, gt.joints2d, schema.bones));
    } else if (ends_with(file, ".pgm") || ends_with(file, ".pbm") || ends_with(file, ".png")) {
      const Silhouette sil = read_silhouette(file);
      emit(out / (stem + ".distance.png"));
      write_png16(written.back().string(), distance_image16(distance_transform(sil)));
      if (sil.area() > 0) {
        emit(out / (stem + ".mat.png"));
        write_png(written.back().string(), mat_overlay(sil, medial_axis(sil)));
      }
    } else {
      throw ArgumentError("render: unsupported input " + file + " (expected a silhouette image or .gt.json)");
    }
  }
  return written;
}

}  // namespace qoja::cli

#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qoja/eval/metrics.hpp"
#include "qoja/oja/ga.hpp"
#include "qoja/synth/generator.hpp"

namespace qoja {

/// Selected positions and the non-null mask of one frame.
inline std::pair<Points2, std::vector<bool>> selected_joints(const FrameAssignment& a, const OjaFrame& f) {
  const int J = f.joint_count();
  Points2 x = Points2::Zero(2, J);
  std::vector<bool> present(J, false);
  for (int j = 0; j < J; ++j) {
    if (f.is_null(j, a[j])) continue;
    x.col(j) = f.position(j, a[j]);
    present[j] = true;
  }
  return {x, present};
}

/// Scores of every method on one sequence. Index m is the method column.
struct SequenceScore {
  std::string id;
  std::vector<std::vector<PckCount>> frames;  // [frame][method]
  std::vector<PckCount> total;
  std::vector<std::vector<PckCount>> per_joint;  // [method][joint]
  std::vector<std::optional<double>> energy;     // full OJA objective, when known
  std::vector<double> joint3d_sum;               // 3D error summed over scored frames
  std::vector<int> joint3d_frames;

  SequenceScore() = default;
  SequenceScore(std::string name, int methods, int joints)
      : id(std::move(name)),
        total(methods),
        per_joint(methods, std::vector<PckCount>(joints)),
        energy(methods),
        joint3d_sum(methods, 0.0),
        joint3d_frames(methods, 0) {}

  std::optional<double> joint3d(int m) const {
    if (joint3d_frames[m] == 0) return std::nullopt;
    return joint3d_sum[m] / joint3d_frames[m];
  }

  /// Adds one frame's prediction for method m.
  void add(int t, int m, const Points2& pred, const std::vector<bool>& present, const GroundTruthFrame& gt,
           const PckConfig& pcfg) {
    if (static_cast<int>(frames.size()) <= t) frames.resize(t + 1, std::vector<PckCount>(total.size()));
    const double area = static_cast<double>(gt.silhouette.area());
    frames[t][m] = pck_count(pred, present, gt.joints2d, gt.visibility, area, pcfg);
    total[m].hits += frames[t][m].hits;
    total[m].visible += frames[t][m].visible;
    const double d = pcfg.alpha * std::sqrt(area);
    for (std::size_t j = 0; j < per_joint[m].size(); ++j) {
      if (!gt.visibility[j]) continue;
      ++per_joint[m][j].visible;
      if (present[j] && (pred.col(j) - gt.joints2d.col(j)).norm() <= d) ++per_joint[m][j].hits;
    }
  }
};

struct EvalReport {
  std::vector<std::string> methods;
  std::vector<SequenceScore> sequences;
  std::vector<PckCount> average;
  std::vector<std::vector<PckCount>> per_joint;
  std::vector<std::optional<double>> joint3d;
  std::vector<std::string> joint_names;
  std::uint64_t seed = 0;
  std::string config_hash;
  double alpha = 0.2;
  bool root_aligned = true;

  int method_index(const std::string& name) const {
    for (std::size_t m = 0; m < methods.size(); ++m)
      if (methods[m] == name) return static_cast<int>(m);
    return -1;
  }

  /// Averages pool visible joints over every frame, so each frame is
  /// weighted by its visible count.
  void recompute_totals() {
    const std::size_t M = methods.size();
    average.assign(M, {});
    per_joint.assign(M, std::vector<PckCount>(joint_names.size()));
    joint3d.assign(M, std::nullopt);
    for (std::size_t m = 0; m < M; ++m) {
      double sum3 = 0.0;
      int n3 = 0;
      for (const auto& s : sequences) {
        for (const auto& f : s.frames) {
          average[m].hits += f[m].hits;
          average[m].visible += f[m].visible;
        }
        for (std::size_t j = 0; j < joint_names.size(); ++j) {
          per_joint[m][j].hits += s.per_joint[m][j].hits;
          per_joint[m][j].visible += s.per_joint[m][j].visible;
        }
        sum3 += s.joint3d_sum[m];
        n3 += s.joint3d_frames[m];
      }
      if (n3 > 0) joint3d[m] = sum3 / n3;
    }
  }
};

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const EvalReport& r) {
  using nlohmann::json;
  json j;
  j["metric"] = "pck";
  j["alpha"] = r.alpha;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["methods"] = r.methods;
  j["joint3d_alignment"] = r.root_aligned ? "root_translation" : "none";
  json rows = json::array();
  for (const auto& s : r.sequences) {
    json row;
    row["sequence"] = s.id;
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      json c;
      c["pck"] = optional_json(s.total[m].percent());
      c["hits"] = s.total[m].hits;
      c["visible"] = s.total[m].visible;
      c["energy"] = optional_json(s.energy[m]);
      c["joint3d_error"] = optional_json(s.joint3d(m));
      row[r.methods[m]] = c;
    }
    json frames = json::array();
    for (const auto& f : s.frames) {
      json fr;
      for (std::size_t m = 0; m < r.methods.size(); ++m) fr[r.methods[m]] = {{"hits", f[m].hits}, {"visible", f[m].visible}};
      frames.push_back(fr);
    }
    row["frames"] = frames;
    rows.push_back(row);
  }
  j["sequences"] = rows;
  json avg, err;
  for (std::size_t m = 0; m < r.methods.size(); ++m) {
    avg[r.methods[m]] = optional_json(r.average[m].percent());
    err[r.methods[m]] = optional_json(r.joint3d[m]);
  }
  j["average"] = avg;
  j["average_joint3d_error"] = err;
  json pj = json::array();
  for (std::size_t k = 0; k < r.joint_names.size(); ++k) {
    json e;
    e["joint"] = r.joint_names[k];
    for (std::size_t m = 0; m < r.methods.size(); ++m) e[r.methods[m]] = optional_json(r.per_joint[m][k].percent());
    pj.push_back(e);
  }
  j["per_joint"] = pj;
  return j;
}

inline std::string format_value(const std::optional<double>& v, const char* fmt = "%.1f") {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

inline std::string method_heading(const std::string& m) {
  if (m == "raw") return "Raw";
  if (m == "qp") return "QP";
  if (m == "ga") return "GA";
  if (m == "gt") return "GT";
  if (m.empty()) return m;
  std::string h = m;
  h[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(h[0])));
  return h;
}

/// Plain-text grid: PCK per sequence and method, then an Average row. A
/// second grid of 3D errors follows when any method has them.
inline std::string to_text(const EvalReport& r) {
  std::size_t w = 8;
  for (const auto& s : r.sequences) w = std::max(w, s.id.size());
  std::ostringstream os;
  auto cell = [&](const std::string& v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %9s", v.c_str());
    os << buf;
  };
  auto head = [&](const std::string& first) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(w), first.c_str());
    os << buf;
  };
  char title[64];
  std::snprintf(title, sizeof title, "PCK@%.2f (%%)\n", r.alpha);
  os << title;
  head("Sequence");
  for (const auto& m : r.methods) cell(method_heading(m));
  os << "\n";
  for (const auto& s : r.sequences) {
    head(s.id);
    for (std::size_t m = 0; m < r.methods.size(); ++m) cell(format_value(s.total[m].percent()));
    os << "\n";
  }
  head("Average");
  for (std::size_t m = 0; m < r.methods.size(); ++m) cell(format_value(r.average[m].percent()));
  os << "\n";

  std::vector<std::size_t> with3d;
  for (std::size_t m = 0; m < r.methods.size(); ++m)
    if (r.joint3d[m]) with3d.push_back(m);
  if (!with3d.empty()) {
    os << "\nMean 3D joint error (m, " << (r.root_aligned ? "root aligned" : "unaligned") << ")\n";
    head("Sequence");
    for (auto m : with3d) cell(method_heading(r.methods[m]));
    os << "\n";
    for (const auto& s : r.sequences) {
      head(s.id);
      for (auto m : with3d) cell(format_value(s.joint3d(static_cast<int>(m)), "%.4f"));
      os << "\n";
    }
    head("Average");
    for (auto m : with3d) cell(format_value(r.joint3d[m], "%.4f"));
    os << "\n";
  }
  return os.str();
}

inline OjaSequence prepare_synthetic(const SyntheticSequence& data, const SkeletonPrior& prior, const OjaConfig& cfg) {
  std::vector<Silhouette> sils;
  for (const auto& f : data.frames) sils.push_back(f.silhouette);
  return prepare_sequence(data.proposals, sils, prior.normalization, cfg);
}

/// Raw (max confidence), QP and GA (seeded with the QP result) selections of
/// the same proposals.
inline std::vector<Assignment> run_methods(const EnergyModel& model, const OjaConfig& cfg, std::uint64_t seed) {
  std::vector<Assignment> out(3);
  out[0] = max_confidence_assignment(model.sequence());
  const QpSolution qp = solve_qp(model.qp(), model.sequence(), cfg, seed);
  out[1] = qp.assignment;
  out[2] = solve_ga(model, cfg, seed, {qp.assignment}).assignment;
  return out;
}

/// Raw, QP and GA on identical proposals of each sequence.
inline EvalReport compare_methods(const std::vector<SyntheticSequence>& data, const SkeletonPrior& prior,
                                  const OjaConfig& cfg, const PckConfig& pcfg, const SkeletonSchema& schema,
                                  std::uint64_t seed, const std::string& config_hash = "") {
  EvalReport r;
  r.methods = {"raw", "qp", "ga"};
  r.seed = seed;
  r.config_hash = config_hash;
  r.alpha = pcfg.alpha;
  r.joint_names = schema.joint_names;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const OjaSequence seq = prepare_synthetic(data[i], prior, cfg);
    const EnergyModel model(seq, prior, cfg, schema.bones);
    const auto sel = run_methods(model, cfg, derive_seed(seed, "oja", i));
    char id[32];
    std::snprintf(id, sizeof id, "seq%03zu", i);
    SequenceScore s(id, 3, schema.joint_count());
    for (int m = 0; m < 3; ++m) {
      s.energy[m] = model.energy(sel[m]);
      for (std::size_t t = 0; t < seq.size(); t += pcfg.frame_stride) {
        auto [x, present] = selected_joints(sel[m][t], seq[t]);
        s.add(static_cast<int>(t / pcfg.frame_stride), m, x, present, data[i].frames[t], pcfg);
      }
    }
    r.sequences.push_back(std::move(s));
  }
  r.recompute_totals();
  return r;
}

}  // namespace qoja

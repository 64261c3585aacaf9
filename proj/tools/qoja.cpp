#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "qoja/cli/commands.hpp"

namespace {

void add_common(CLI::App* cmd, qoja::cli::CommonOptions& o, std::uint64_t& seed) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", seed, "root seed (overrides the config)");
  cmd->add_option("--workspace", o.workspace, "default root for inputs and outputs");
}

int fail(const std::string& code, const std::string& msg) {
  std::cerr << "qoja: error: " << code << ": " << msg << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = qoja::cli;
  CLI::App app{"Optimal joint assignment and proxy fitting for quadruped silhouettes"};
  app.require_subcommand(1);

  cli::SynthOptions synth;
  cli::PriorOptions prior;
  cli::OjaOptions oja;
  cli::FitOptions fit;
  cli::EvalOptions eval;
  cli::RenderOptions render;
  std::uint64_t seeds[5] = {};
  int frames = 0, sequences = 0, max_frames = 0, max_sequences = 0;

  auto* s = app.add_subcommand("synth", "generate a synthetic dataset with priors");
  add_common(s, synth.common, seeds[0]);
  auto* s_frames = s->add_option("--frames", frames, "frames per sequence");
  auto* s_seqs = s->add_option("--sequences", sequences, "number of sequences");
  s->add_option("--out", synth.out, "output directory");
  s->add_flag("--heatmaps", synth.heatmaps, "also write heatmap mosaics");

  auto* p = app.add_subcommand("prior", "train the joint and shape/pose priors");
  add_common(p, prior.common, seeds[1]);
  p->add_option("--out", prior.out, "output directory");

  auto* o = app.add_subcommand("oja", "select joints from proposals");
  add_common(o, oja.common, seeds[2]);
  o->add_option("--method", oja.method, "raw, qp, ga or brute")->check(CLI::IsMember({"raw", "qp", "ga", "brute"}));
  o->add_option("--in", oja.in, "dataset directory");
  o->add_option("--out", oja.out, "output directory");

  auto* f = app.add_subcommand("fit", "fit the proxy model to selected joints and silhouettes");
  add_common(f, fit.common, seeds[3]);
  f->add_option("--in", fit.in, "assignment directory");
  f->add_option("--out", fit.out, "output directory");
  f->add_flag("--init-gt", fit.init_gt, "start from the first frame's ground truth");
  f->add_flag("--overlay", fit.overlay, "write one overlay PNG per frame");
  auto* f_frames = f->add_option("--max-frames", max_frames, "fit at most this many frames per sequence");
  auto* f_seqs = f->add_option("--max-sequences", max_sequences, "fit at most this many sequences");

  auto* e = app.add_subcommand("eval", "score predictions against ground truth");
  add_common(e, eval.common, seeds[4]);
  e->add_option("--in", eval.in, "dataset, assignment or fit directories")->required();
  e->add_option("--out", eval.out, "report directory");

  auto* r = app.add_subcommand("render", "debug images for silhouettes and ground-truth frames");
  r->add_option("--frame", render.frames, "silhouette image or .gt.json")->required();
  r->add_option("--out", render.out, "output directory");
  r->add_option("--sigma", render.heatmap_sigma, "heatmap sigma in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    return fail("usage", ex.what());
  }

  auto seed_of = [&](CLI::App* cmd, int k) -> std::optional<std::uint64_t> {
    if (cmd->count("--seed")) return seeds[k];
    return std::nullopt;
  };
  try {
    std::string where;
    if (s->parsed()) {
      synth.common.seed = seed_of(s, 0);
      if (s_frames->count()) synth.frames = frames;
      if (s_seqs->count()) synth.sequences = sequences;
      where = cli::cmd_synth(synth).string();
    } else if (p->parsed()) {
      prior.common.seed = seed_of(p, 1);
      where = cli::cmd_prior(prior).string();
    } else if (o->parsed()) {
      oja.common.seed = seed_of(o, 2);
      where = cli::cmd_oja(oja).string();
    } else if (f->parsed()) {
      fit.common.seed = seed_of(f, 3);
      if (f_frames->count()) fit.max_frames = max_frames;
      if (f_seqs->count()) fit.max_sequences = max_sequences;
      where = cli::cmd_fit(fit).string();
    } else if (e->parsed()) {
      eval.common.seed = seed_of(e, 4);
      where = cli::cmd_eval(eval).string();
      std::ifstream txt(std::filesystem::path(where) / "report.txt");
      std::cout << txt.rdbuf();
    } else if (r->parsed()) {
      for (const auto& w : cli::cmd_render(render)) std::cout << w.string() << "\n";
      return 0;
    }
    std::cout << where << "\n";
  } catch (const qoja::Error& ex) {
    return fail(ex.code(), ex.what());
  } catch (const std::filesystem::filesystem_error& ex) {
    return fail("io", ex.what());
  } catch (const nlohmann::json::exception& ex) {
    return fail("validation", ex.what());
  } catch (const std::exception& ex) {
    return fail("internal", ex.what());
  }
  return 0;
}

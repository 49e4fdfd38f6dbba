#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace situ::cli;
  CLI::App app{"situ: situation grounding experiments and dataset tools"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker cap; 1 gives bit-reproducible output")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenScenesOptions gen;
  auto* g = app.add_subcommand("gen-scenes", "generate synthetic scenes, trajectories, depth and cues");
  g->fallthrough();
  g->add_option("--count", gen.count, "number of scenes")->required();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--frames-per-scene", gen.frames_per_scene)->capture_default_str();

  BuildDatasetOptions bd;
  auto* b = app.add_subcommand("build-dataset", "turn trajectories into captioned situation records");
  b->fallthrough();
  b->add_option("--scenes", bd.scenes, "directory written by gen-scenes")->required();
  b->add_option("--out", bd.out, "output directory")->required();
  b->add_option("--provider-url", bd.provider_url, "caption service; mock when unset")
      ->envname("SITU_PROVIDER_URL");
  b->add_flag("--strict", bd.strict, "fail when the provider cannot be reached");
  b->add_option("--qa-per-category", bd.qa_per_category)->capture_default_str();
  b->add_option("--rank-threshold", bd.rank_threshold)->capture_default_str();
  b->add_flag("--verify", bd.verify, "score captions with the scorer");
  b->add_option("--scorer-url", bd.scorer_url, "scoring service; mock when unset")
      ->envname("SITU_SCORER_URL");
  b->add_option("--timeout-ms", bd.timeout_ms)->capture_default_str();
  b->add_option("--retries", bd.retries)->capture_default_str();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "fit the grounding model");
  t->fallthrough();
  t->add_option("--dataset", tr.dataset, "directory written by gen-scenes")->required();
  t->add_option("--config", tr.config, "training config JSON");
  t->add_option("--out", tr.out, "output directory")->required();
  t->add_option("--seed", tr.seed, "overrides the config seed");
  t->add_option("--epochs", tr.epochs, "overrides the config epoch count");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "score a trained model on a dataset");
  e->fallthrough();
  e->add_option("--params", ev.params, "params.bin from train")->required();
  e->add_option("--dataset", ev.dataset)->required();
  e->add_option("--report", ev.report, "report JSON path")->required();
  e->add_option("--predictions", ev.predictions, "per-sample predictions JSONL");
  e->add_flag("--with-baseline", ev.with_baseline, "add the seeded random baseline row");
  e->add_option("--seed", ev.seed, "random baseline seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  if (g->parsed()) {
    return gen_scenes(gen, threads);
  }
  if (b->parsed()) {
    return build_dataset(bd, threads);
  }
  if (t->parsed()) {
    return train(tr, threads);
  }
  return eval(ev, threads);
}

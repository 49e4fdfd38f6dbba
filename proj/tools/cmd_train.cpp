#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "manifest.hpp"
#include "situ/corpus.hpp"
#include "situ/synthetic.hpp"
#include "situ/training.hpp"

namespace situ::cli {

namespace fs = std::filesystem;

int train(const TrainOptions& o, int threads) {
  const fs::path out(o.out);
  RunManifest m("train", out / "manifest.json");
  m.config = {{"dataset", o.dataset}, {"config_file", o.config}, {"out", o.out},
              {"threads", threads}};
  return run_with_manifest(m, [&] {
    TrainConfig cfg;
    if (!o.config.empty()) {
      std::ifstream in(o.config, std::ios::binary);
      if (!in) {
        throw UsageError("cannot open --config " + o.config);
      }
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(o.config + ": " + e.what());
      }
      cfg = train_config_from_json(j);
      m.add_input(o.config);
    }
    if (o.seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(o.seed);
    }
    if (o.epochs >= 0) {
      cfg.epochs = o.epochs;
    }
    cfg.threads = threads;
    validate(cfg);
    m.seed = cfg.seed;
    m.config["train"] = train_config_to_json(cfg);

    m.add_input(fs::path(o.dataset) / "scenes");
    m.add_input(fs::path(o.dataset) / "cues");
    const auto samples = load_corpus(o.dataset);

    fs::create_directories(out);
    auto run = [&] {
      try {
        return fit(samples, cfg, default_vocabulary());
      } catch (const TrainingDiverged& e) {
        write_loss_history(out / "loss_history.csv", e.history());
        throw;
      }
    };
    const FitResult fr = run();
    save_model(out / "params.bin", fr.model);
    write_loss_history(out / "loss_history.csv", fr.history);
    m.add_output(out / "params.bin");
    m.add_output(out / "loss_history.csv");
    m.summary = {{"samples", samples.size()},
                 {"best_epoch", fr.best_epoch},
                 {"final_train_total", fr.history.empty() ? 0.0 : fr.history.back().total},
                 {"best_validation_total",
                  fr.validation.empty() ? 0.0 : fr.validation[fr.best_epoch - 1]}};
    std::cout << "trained on " << samples.size() << " samples, best epoch " << fr.best_epoch
              << "\n";
  });
}

}  // namespace situ::cli

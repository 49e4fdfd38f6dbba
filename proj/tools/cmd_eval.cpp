#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "manifest.hpp"
#include "situ/corpus.hpp"
#include "situ/grounding.hpp"
#include "situ/metrics.hpp"
#include "situ/parallel.hpp"
#include "situ/rng.hpp"

namespace situ::cli {

namespace fs = std::filesystem;

int eval(const EvalOptions& o, int threads) {
  const fs::path report(o.report);
  RunManifest m("eval", fs::path(o.report + ".manifest.json"));
  m.seed = o.seed;
  m.config = {{"params", o.params},          {"dataset", o.dataset},
              {"report", o.report},          {"predictions", o.predictions},
              {"with_baseline", o.with_baseline}, {"seed", o.seed},
              {"threads", threads}};
  return run_with_manifest(m, [&] {
    if (!fs::is_regular_file(o.params)) {
      throw UsageError("--params not found: " + o.params);
    }
    m.add_input(o.params);
    m.add_input(fs::path(o.dataset) / "scenes");
    m.add_input(fs::path(o.dataset) / "cues");
    const Model model = load_model(o.params);
    const auto samples = load_corpus(o.dataset);

    std::vector<GroundingResult> results(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t i) {
      results[i] = ground(model, *samples[i].scene, samples[i].cue);
    });
    std::vector<Situation> preds, gts;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      preds.push_back(results[i].predicted);
      gts.push_back(samples[i].gt);
    }
    std::vector<std::pair<std::string, GroundingEvalReport>> rows;
    rows.emplace_back(std::string(variant_name(model.config().variant)), evaluate(preds, gts));
    if (o.with_baseline) {
      std::vector<Situation> rnd;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        rnd.push_back(random_baseline(*samples[i].scene, mix_seed(o.seed, i)));
      }
      rows.emplace_back("random", evaluate(rnd, gts));
    }

    const std::string table = format_report_table(rows);
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& [name, r] : rows) {
      nlohmann::json row = report_to_json(r);
      row["method"] = name;
      j["rows"].push_back(std::move(row));
    }
    j["baseline_seed"] = o.with_baseline ? nlohmann::json(o.seed) : nlohmann::json(nullptr);
    j["table"] = table;
    if (report.has_parent_path()) {
      fs::create_directories(report.parent_path());
    }
    {
      std::ofstream out(report, std::ios::binary);
      out << j.dump(2) << '\n';
      if (!out) {
        throw std::runtime_error("cannot write " + report.string());
      }
    }
    m.add_output(report);
    if (!o.predictions.empty()) {
      std::ofstream out(o.predictions, std::ios::binary);
      for (const auto& r : results) {
        out << grounding_to_json(r).dump() << '\n';
      }
      if (!out) {
        throw std::runtime_error("cannot write " + o.predictions);
      }
      m.add_output(o.predictions);
    }
    m.summary = {{"samples", samples.size()}};
    std::cout << table;
  });
}

}  // namespace situ::cli

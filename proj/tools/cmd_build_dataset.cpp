#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <tuple>

#include "commands.hpp"
#include "manifest.hpp"
#include "situ/dataset.hpp"
#include "situ/frame_io.hpp"
#include "situ/parallel.hpp"
#include "situ/scene_io.hpp"

namespace situ::cli {

namespace fs = std::filesystem;

namespace {

struct FrameJob {
  std::shared_ptr<const Scene> scene;
  TrajectoryEntry entry;
  fs::path base_dir;
};

}  // namespace

int build_dataset(const BuildDatasetOptions& o, int threads) {
  const fs::path in(o.scenes), out(o.out);
  RunManifest m("build-dataset", out / "manifest.json");
  m.config = {{"scenes", o.scenes},
              {"out", o.out},
              {"provider", o.provider_url.empty() ? "mock" : o.provider_url},
              {"strict", o.strict},
              {"qa_per_category", o.qa_per_category},
              {"rank_threshold", o.rank_threshold},
              {"verify", o.verify},
              {"scorer", o.scorer_url.empty() ? "mock" : o.scorer_url},
              {"timeout_ms", o.timeout_ms},
              {"retries", o.retries},
              {"threads", threads}};
  return run_with_manifest(m, [&] {
    if (o.qa_per_category < 0) {
      throw UsageError("--qa-per-category must be non-negative");
    }
    if (!fs::is_directory(in / "scenes") || !fs::is_directory(in / "trajectories")) {
      throw UsageError("--scenes must contain scenes/ and trajectories/: " + in.string());
    }
    m.add_input(in / "scenes");
    m.add_input(in / "trajectories");
    m.add_input(in / "depth");

    std::vector<fs::path> scene_files;
    for (const auto& e : fs::directory_iterator(in / "scenes")) {
      if (e.is_regular_file() && e.path().extension() == ".json") {
        scene_files.push_back(e.path());
      }
    }
    std::sort(scene_files.begin(), scene_files.end());

    std::vector<FrameJob> jobs;
    for (const auto& f : scene_files) {
      auto scene = std::make_shared<const Scene>(load_scene(f));
      const fs::path traj = in / "trajectories" / (f.stem().string() + ".jsonl");
      if (!fs::exists(traj)) {
        continue;
      }
      for (auto& e : load_trajectory(traj)) {
        jobs.push_back({scene, std::move(e), traj.parent_path()});
      }
    }
    if (jobs.empty()) {
      throw UsageError("no trajectory frames under " + in.string());
    }

    std::unique_ptr<CaptionProvider> provider;
    if (o.provider_url.empty()) {
      provider = std::make_unique<MockCaptionProvider>();
    } else {
      provider = std::make_unique<HttpCaptionProvider>(
          HttpClientConfig{o.provider_url, o.timeout_ms, o.retries});
    }
    std::unique_ptr<Scorer> scorer;
    if (o.verify) {
      if (o.scorer_url.empty()) {
        scorer = std::make_unique<MockScorer>();
      } else {
        scorer = std::make_unique<HttpScorer>(HttpClientConfig{o.scorer_url, o.timeout_ms, o.retries});
      }
    }

    BuildOptions bo;
    bo.qa_per_category = o.qa_per_category;
    std::vector<BuildOutcome> outcomes(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
      const CameraFrame frame = load_frame(jobs[i].entry, jobs[i].base_dir);
      outcomes[i] = build_record(*jobs[i].scene, frame, *provider, bo);
    });

    std::vector<SituationRecord> records;
    nlohmann::json skipped = nlohmann::json::array();
    std::size_t degraded = 0, qa_before = 0, qa_after = 0;
    std::string first_provider_error;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      auto& oc = outcomes[i];
      if (!oc.record) {
        skipped.push_back({{"frame_id", jobs[i].entry.frame_id}, {"reason", oc.skip_reason}});
        std::cerr << "skip " << jobs[i].entry.frame_id << ": " << oc.skip_reason << "\n";
        continue;
      }
      if (oc.record->caption_missing) {
        ++degraded;
        if (first_provider_error.empty()) {
          first_provider_error = oc.provider_error;
        }
      }
      qa_before += oc.record->qa.size();
      oc.record->qa = rank_filter_qa(oc.record->qa, o.rank_threshold);
      qa_after += oc.record->qa.size();
      records.push_back(std::move(*oc.record));
    }
    if (o.strict && degraded > 0) {
      throw UsageError("provider unreachable (--strict): " + first_provider_error);
    }
    if (records.empty()) {
      throw UsageError("every frame was skipped; no records to write");
    }

    std::size_t verified = 0;
    if (scorer) {
      parallel_for(records.size(), threads, [&](std::size_t i) {
        if (!records[i].caption_missing) {
          records[i].verification = verify_record(records[i], *scorer);
        }
      });
      for (const auto& r : records) {
        verified += r.verification.has_value();
      }
    }

    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return std::tie(a.scene_id, a.frame_id) < std::tie(b.scene_id, b.frame_id);
    });
    fs::create_directories(out);
    write_records(out / "records.jsonl", records);
    const DatasetStats stats = compute_stats(records);
    {
      std::ofstream sf(out / "stats.json", std::ios::binary);
      sf << stats_to_json(stats).dump(2) << '\n';
      if (!sf) {
        throw std::runtime_error("cannot write " + (out / "stats.json").string());
      }
    }
    m.add_output(out / "records.jsonl");
    m.add_output(out / "stats.json");
    m.summary = {{"frames", jobs.size()},
                 {"records", records.size()},
                 {"skipped", skipped.size()},
                 {"skipped_frames", skipped},
                 {"degraded", degraded},
                 {"qa_generated", qa_before},
                 {"qa_kept", qa_after},
                 {"verified", verified}};
    std::cout << "frames " << jobs.size() << ", records " << records.size() << ", skipped "
              << skipped.size() << ", degraded " << degraded << "\n";
  });
}

}  // namespace situ::cli

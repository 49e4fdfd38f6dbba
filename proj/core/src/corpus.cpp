#include "situ/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include "situ/error.hpp"
#include "situ/parallel.hpp"
#include "situ/rng.hpp"
#include "situ/scene_io.hpp"

namespace situ {

namespace fs = std::filesystem;

void write_cues(const fs::path& path, const std::vector<SituationCue>& cues) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  for (const auto& c : cues) {
    out << cue_to_json(c).dump() << '\n';
  }
  if (!out) {
    throw Error("write failed: " + path.string());
  }
}

std::vector<SituationCue> load_cues(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::vector<SituationCue> cues;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      cues.push_back(cue_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), n);
    }
  }
  return cues;
}

std::string synthetic_scene_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d", index);
  return buf;
}

std::uint64_t synthetic_scene_seed(std::uint64_t seed, int index) {
  return mix_seed(seed, static_cast<std::uint64_t>(index));
}

Scene synthetic_scene(std::uint64_t seed, int index) {
  SceneGenConfig cfg;
  cfg.seed = synthetic_scene_seed(seed, index);
  cfg.scene_id = synthetic_scene_id(index);
  return gen_scene(cfg);
}

std::uint64_t synthetic_trajectory_seed(std::uint64_t scene_seed) {
  return mix_seed(scene_seed, 0x7a1);
}

std::vector<SituationCue> synthetic_cues(const Scene& scene, std::uint64_t scene_seed, int count) {
  const std::uint64_t traj = synthetic_trajectory_seed(scene_seed);
  std::vector<SituationCue> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    // same pose stream as gen_trajectory
    const Situation gt = gen_situation(scene, mix_seed(traj, static_cast<std::uint64_t>(i)));
    CueConfig cc;
    cc.seed = mix_seed(scene_seed, 0xc0e000 + static_cast<std::uint64_t>(i));
    out.push_back(make_cue(scene, gt, cc));
  }
  return out;
}

std::vector<TrainSample> synthetic_split(int scenes, int per_scene, std::uint64_t seed,
                                         int threads) {
  if (scenes < 0 || per_scene < 0) {
    throw std::invalid_argument("synthetic_split: negative size");
  }
  std::vector<std::vector<TrainSample>> chunks(scenes);
  parallel_for(chunks.size(), threads, [&](std::size_t i) {
    const int idx = static_cast<int>(i);
    auto scene = std::make_shared<const Scene>(synthetic_scene(seed, idx));
    for (auto& c : synthetic_cues(*scene, synthetic_scene_seed(seed, idx), per_scene)) {
      Situation gt = c.gt;
      chunks[i].push_back({scene, std::move(c), gt});
    }
  });
  std::vector<TrainSample> out;
  out.reserve(static_cast<std::size_t>(scenes) * per_scene);
  for (auto& c : chunks) {
    std::move(c.begin(), c.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<TrainSample> load_corpus(const fs::path& dir) {
  const fs::path scene_dir = dir / "scenes";
  if (!fs::is_directory(scene_dir)) {
    throw ParseError("no scenes/ directory under " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(scene_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TrainSample> out;
  for (const auto& f : files) {
    const fs::path cue_file = dir / "cues" / (f.stem().string() + ".jsonl");
    if (!fs::exists(cue_file)) {
      continue;
    }
    auto scene = std::make_shared<const Scene>(load_scene(f));
    for (auto& c : load_cues(cue_file)) {
      if (c.scene_id != scene->scene_id) {
        throw ParseError(cue_file.string() + ": cue for scene '" + c.scene_id + "' next to scene '" +
                         scene->scene_id + "'");
      }
      Situation gt = c.gt;
      out.push_back({scene, std::move(c), gt});
    }
  }
  if (out.empty()) {
    throw ParseError("no samples found under " + dir.string());
  }
  return out;
}

}  // namespace situ

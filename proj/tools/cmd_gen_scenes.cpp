#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "manifest.hpp"
#include "situ/corpus.hpp"
#include "situ/frame_io.hpp"
#include "situ/parallel.hpp"
#include "situ/scene_io.hpp"

namespace situ::cli {

namespace fs = std::filesystem;

int gen_scenes(const GenScenesOptions& o, int threads) {
  const fs::path out(o.out);
  RunManifest m("gen-scenes", out / "manifest.json");
  m.seed = o.seed;
  m.config = {{"count", o.count}, {"seed", o.seed}, {"out", o.out},
              {"frames_per_scene", o.frames_per_scene}, {"threads", threads}};
  return run_with_manifest(m, [&] {
    if (o.count < 1) {
      throw UsageError("--count must be at least 1");
    }
    if (o.frames_per_scene < 1) {
      throw UsageError("--frames-per-scene must be at least 1");
    }
    for (const char* sub : {"scenes", "trajectories", "depth", "cues"}) {
      fs::create_directories(out / sub);
      m.add_output(out / sub);
    }
    const FrameConfig fc;
    parallel_for(static_cast<std::size_t>(o.count), threads, [&](std::size_t i) {
      const int idx = static_cast<int>(i);
      const std::uint64_t scene_seed = synthetic_scene_seed(o.seed, idx);
      const Scene scene = synthetic_scene(o.seed, idx);
      save_scene(out / "scenes" / (scene.scene_id + ".json"), scene);

      const auto traj =
          gen_trajectory(scene, o.frames_per_scene, synthetic_trajectory_seed(scene_seed), fc);
      std::vector<TrajectoryEntry> entries;
      for (const auto& t : traj) {
        const auto& f = t.frame;
        write_depth_pgm(out / "depth" / (f.frame_id + ".pgm"), f.width, f.height, f.depth);
        TrajectoryEntry e;
        e.frame_id = f.frame_id;
        e.extrinsic = f.extrinsic;
        e.intrinsic = f.intrinsic;
        e.width = f.width;
        e.height = f.height;
        e.depth_path = "../depth/" + f.frame_id + ".pgm";
        entries.push_back(std::move(e));
      }
      write_trajectory(out / "trajectories" / (scene.scene_id + ".jsonl"), entries);
      write_cues(out / "cues" / (scene.scene_id + ".jsonl"),
                 synthetic_cues(scene, scene_seed, o.frames_per_scene));
    });
    m.summary = {{"scenes", o.count}, {"frames", o.count * o.frames_per_scene}};
    std::cout << "wrote " << o.count << " scenes, " << o.count * o.frames_per_scene
              << " frames to " << out.string() << "\n";
  });
}

}  // namespace situ::cli

#include <benchmark/benchmark.h>

#include "situ/corpus.hpp"
#include "situ/grounding.hpp"
#include "situ/region.hpp"
#include "situ/synthetic.hpp"
#include "situ/training.hpp"

using namespace situ;

static void BM_QuatMul(benchmark::State& state) {
  Quaternion a = quat_from_yaw(0.3), b = quat_from_yaw(-1.1);
  for (auto _ : state) {
    a = quat_mul(a, b);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_QuatMul);

static void BM_GenScene(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SceneGenConfig cfg;
    cfg.seed = seed++;
    benchmark::DoNotOptimize(gen_scene(cfg));
  }
}
BENCHMARK(BM_GenScene);

static void BM_ExtractRegion(benchmark::State& state) {
  const Scene scene = synthetic_scene(1, 0);
  const CameraFrame frame = gen_frame(scene, gen_situation(scene, 2), FrameConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_region(frame, scene));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.points.size()));
}
BENCHMARK(BM_ExtractRegion);

static void BM_Ground(benchmark::State& state) {
  const auto samples = synthetic_split(1, 1, 3);
  TrainConfig cfg;
  const Model m = Model::initialized(model_config_for(cfg, default_vocabulary()), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground(m, *samples[0].scene, samples[0].cue));
  }
}
BENCHMARK(BM_Ground);

static void BM_TotalLossGradient(benchmark::State& state) {
  const auto samples = synthetic_split(1, 1, 3);
  TrainConfig cfg;
  cfg.variant = static_cast<Variant>(state.range(0));
  const Model m = Model::initialized(model_config_for(cfg, default_vocabulary()), 1);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.params().size());
  for (auto _ : state) {
    grad.setZero();
    benchmark::DoNotOptimize(total_loss(samples[0], m, cfg, &grad));
  }
  state.SetLabel(std::string(variant_name(cfg.variant)));
}
BENCHMARK(BM_TotalLossGradient)->Arg(0)->Arg(1)->Arg(2);

static void BM_FitEpoch(benchmark::State& state) {
  const auto samples = synthetic_split(20, 4, 5);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(samples, cfg, default_vocabulary()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_FitEpoch)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

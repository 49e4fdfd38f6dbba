#pragma once

#include <cstdint>
#include <string>

namespace situ::cli {

struct GenScenesOptions {
  int count = 0;
  std::uint64_t seed = 0;
  std::string out;
  int frames_per_scene = 4;
};

struct BuildDatasetOptions {
  std::string scenes;
  std::string out;
  std::string provider_url;  // empty: mock provider
  bool strict = false;
  int qa_per_category = 10;
  double rank_threshold = 3.0;
  bool verify = false;
  std::string scorer_url;    // empty: mock scorer
  int timeout_ms = 5000;
  int retries = 2;
};

struct TrainOptions {
  std::string dataset;
  std::string config;  // optional JSON file
  std::string out;
  int seed = -1;       // overrides the config when >= 0
  int epochs = -1;
};

struct EvalOptions {
  std::string params;
  std::string dataset;
  std::string report;
  std::string predictions;
  bool with_baseline = false;
  std::uint64_t seed = 0;  // random baseline
};

int gen_scenes(const GenScenesOptions& o, int threads);
int build_dataset(const BuildDatasetOptions& o, int threads);
int train(const TrainOptions& o, int threads);
int eval(const EvalOptions& o, int threads);

}  // namespace situ::cli

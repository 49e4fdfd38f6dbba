#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "situ/geometry.hpp"

namespace situ {

// Structured stand-in for a situation description: what the observer sees
// around them, as (object, bearing bin, distance band) triples.
struct Observation {
  int instance_id = 0;
  int bearing_bin = 0;
  int distance_band = 0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct SituationCue {
  std::string scene_id;
  Situation gt;
  std::vector<Observation> observations;
  friend bool operator==(const SituationCue&, const SituationCue&) = default;
};

struct CueConfig {
  int nearest = 5;           // M
  int bearing_bins = 8;      // bin 0 is straight ahead, counterclockwise
  int distance_bands = 4;
  double band_width = 1.0;   // meters; band b covers (b*w, (b+1)*w], band 0 includes 0
  double p_noise = 0.1;      // per-field probability of moving to an adjacent bin
  std::uint64_t seed = 0;
};

void validate(const CueConfig& cfg);

// Bearing bins are centered: bin 0 spans [-pi/n, pi/n).
int bearing_to_bin(double bearing, int bins);
int distance_to_band(double distance, double band_width, int bands);

// Observations of the M instances nearest (x-y) to the observer, sorted by
// distance then id. Throws InvalidScene on a scene without instances and
// std::invalid_argument when gt lies outside the scene's x-y bounds.
SituationCue make_cue(const Scene& scene, const Situation& gt, const CueConfig& cfg);

// {scene_id, gt: {position, rotation}, observations: [[id, bearing, band], ...]}
nlohmann::json cue_to_json(const SituationCue& cue);
SituationCue cue_from_json(const nlohmann::json& j);

}  // namespace situ

#include "situ/cue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "situ/error.hpp"
#include "situ/rng.hpp"
#include "situ/scene_io.hpp"

namespace situ {

using nlohmann::json;

void validate(const CueConfig& cfg) {
  std::string bad;
  auto flag = [&](bool ok, const char* field) {
    if (!ok) {
      bad += bad.empty() ? field : std::string(", ") + field;
    }
  };
  flag(cfg.nearest >= 1, "nearest");
  flag(cfg.bearing_bins >= 2, "bearing_bins");
  flag(cfg.distance_bands >= 1, "distance_bands");
  flag(cfg.band_width > 0, "band_width");
  flag(cfg.p_noise >= 0 && cfg.p_noise <= 1, "p_noise");
  if (!bad.empty()) {
    throw ConfigError("invalid CueConfig: " + bad);
  }
}

int bearing_to_bin(double bearing, int bins) {
  const double width = 2.0 * std::numbers::pi / bins;
  const int b = static_cast<int>(std::floor((wrap_angle(bearing) + width / 2.0) / width));
  return ((b % bins) + bins) % bins;
}

int distance_to_band(double distance, double band_width, int bands) {
  const int b = static_cast<int>(std::ceil(distance / band_width)) - 1;
  return std::clamp(b, 0, bands - 1);
}

SituationCue make_cue(const Scene& scene, const Situation& gt, const CueConfig& cfg) {
  validate(cfg);
  if (scene.instances.empty()) {
    throw InvalidScene("make_cue: scene '" + scene.scene_id + "' has no instances");
  }
  const Bounds2 b = scene_bounds_xy(scene);
  const Vec3& s = gt.position;
  if (!(s.x() >= b.min_x && s.x() <= b.max_x && s.y() >= b.min_y && s.y() <= b.max_y)) {
    throw std::invalid_argument("make_cue: situation lies outside the scene bounds");
  }
  const double yaw = yaw_from_quat(gt.rotation);

  struct Near {
    double dist;
    const Instance* inst;
  };
  std::vector<Near> near;
  near.reserve(scene.instances.size());
  for (const auto& inst : scene.instances) {
    near.push_back({std::hypot(inst.center.x() - s.x(), inst.center.y() - s.y()), &inst});
  }
  std::sort(near.begin(), near.end(), [](const Near& a, const Near& c) {
    return a.dist != c.dist ? a.dist < c.dist : a.inst->id < c.inst->id;
  });
  near.resize(std::min<std::size_t>(near.size(), static_cast<std::size_t>(cfg.nearest)));

  Rng rng(cfg.seed);
  auto jitter = [&](int v, int n, bool cyclic) {
    // Draws are consumed unconditionally so p_noise does not shift the stream.
    const bool flip = rng.bernoulli(cfg.p_noise);
    const int step = rng.uniform() < 0.5 ? -1 : 1;
    if (!flip || n < 2) {
      return v;
    }
    if (cyclic) {
      return ((v + step) % n + n) % n;
    }
    if (v + step < 0 || v + step >= n) {
      return v - step;
    }
    return v + step;
  };

  SituationCue cue;
  cue.scene_id = scene.scene_id;
  cue.gt = gt;
  for (const auto& n : near) {
    const double bearing =
        std::atan2(n.inst->center.y() - s.y(), n.inst->center.x() - s.x()) - yaw;
    Observation o;
    o.instance_id = n.inst->id;
    o.bearing_bin = jitter(bearing_to_bin(bearing, cfg.bearing_bins), cfg.bearing_bins, true);
    o.distance_band =
        jitter(distance_to_band(n.dist, cfg.band_width, cfg.distance_bands), cfg.distance_bands, false);
    cue.observations.push_back(o);
  }
  return cue;
}

json cue_to_json(const SituationCue& cue) {
  json obs = json::array();
  for (const auto& o : cue.observations) {
    obs.push_back({o.instance_id, o.bearing_bin, o.distance_band});
  }
  return {{"scene_id", cue.scene_id}, {"gt", situation_to_json(cue.gt)}, {"observations", std::move(obs)}};
}

SituationCue cue_from_json(const json& j) {
  try {
    SituationCue cue;
    cue.scene_id = j.at("scene_id").get<std::string>();
    cue.gt = situation_from_json(j.at("gt"));
    for (const auto& o : j.at("observations")) {
      if (!o.is_array() || o.size() != 3) {
        throw ParseError("cue observation must be [instance_id, bearing_bin, distance_band]");
      }
      cue.observations.push_back({o[0].get<int>(), o[1].get<int>(), o[2].get<int>()});
    }
    if (cue.observations.empty()) {
      throw ParseError("cue has no observations");
    }
    return cue;
  } catch (const json::exception& e) {
    throw ParseError(std::string("cue json: ") + e.what());
  }
}

}  // namespace situ

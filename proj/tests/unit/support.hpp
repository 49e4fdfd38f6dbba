#pragma once

#include <string>
#include <utility>
#include <vector>

#include "situ/geometry.hpp"

namespace situ::testing {

// Scene from (label, points) groups; instance ids count up from 0.
inline Scene make_scene(const std::vector<std::pair<std::string, std::vector<Vec3>>>& groups,
                        std::string scene_id = "t") {
  Scene s;
  s.scene_id = std::move(scene_id);
  int id = 0;
  for (const auto& [label, pts] : groups) {
    std::vector<int> idx;
    for (const auto& p : pts) {
      idx.push_back(static_cast<int>(s.points.size()));
      s.points.push_back({p.x(), p.y(), p.z(), 0.5, 0.5, 0.5});
    }
    s.instances.push_back(make_instance(id++, label, std::move(idx), s.points));
  }
  return s;
}

}  // namespace situ::testing

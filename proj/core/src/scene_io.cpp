#include "situ/scene_io.hpp"

#include <fstream>

#include "situ/error.hpp"

namespace situ {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError("expected a 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json quat_to_json(const Quaternion& q) { return json::array({q.qx, q.qy, q.qz, q.w}); }

Quaternion quat_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError("expected a quaternion [qx,qy,qz,w]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json situation_to_json(const Situation& s) {
  return {{"position", vec3_to_json(s.position)}, {"rotation", quat_to_json(s.rotation)}};
}

Situation situation_from_json(const json& j) {
  return {vec3_from_json(j.at("position")), quat_from_json(j.at("rotation"))};
}

json scene_to_json(const Scene& scene) {
  json points = json::array();
  for (const auto& p : scene.points) {
    points.push_back({p.x, p.y, p.z, p.r, p.g, p.b});
  }
  json instances = json::array();
  for (const auto& inst : scene.instances) {
    instances.push_back({{"id", inst.id},
                         {"label", inst.label},
                         {"point_indices", inst.point_indices},
                         {"center", vec3_to_json(inst.center)},
                         {"bbox_extent", vec3_to_json(inst.bbox_extent)}});
  }
  return {{"scene_id", scene.scene_id}, {"points", std::move(points)},
          {"instances", std::move(instances)}};
}

Scene scene_from_json(const json& j) {
  try {
    Scene scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    for (const auto& row : j.at("points")) {
      if (!row.is_array() || row.size() != 6) {
        throw ParseError("scene point rows must have 6 entries");
      }
      scene.points.push_back({row[0].get<double>(), row[1].get<double>(),
                              row[2].get<double>(), row[3].get<double>(),
                              row[4].get<double>(), row[5].get<double>()});
    }
    for (const auto& ji : j.at("instances")) {
      Instance inst;
      inst.id = ji.at("id").get<int>();
      inst.label = ji.at("label").get<std::string>();
      inst.point_indices = ji.at("point_indices").get<std::vector<int>>();
      inst.center = vec3_from_json(ji.at("center"));
      inst.bbox_extent = vec3_from_json(ji.at("bbox_extent"));
      scene.instances.push_back(std::move(inst));
    }
    return scene;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene json: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open scene file " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  Scene scene = scene_from_json(j);
  validate_scene(scene);
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write scene file " + path.string());
  }
  out << scene_to_json(scene).dump() << '\n';
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

}  // namespace situ

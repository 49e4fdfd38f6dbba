#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "situ/geometry.hpp"

namespace situ {

// Scene file: {scene_id, points: [[x,y,z,r,g,b],...],
//              instances: [{id, label, point_indices, center, bbox_extent},...]}
nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Scene& scene);

nlohmann::json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);
nlohmann::json quat_to_json(const Quaternion& q);
Quaternion quat_from_json(const nlohmann::json& j);

// {position: [x,y,z], rotation: [qx,qy,qz,w]}
nlohmann::json situation_to_json(const Situation& s);
Situation situation_from_json(const nlohmann::json& j);

}  // namespace situ

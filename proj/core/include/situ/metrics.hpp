#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "situ/geometry.hpp"

namespace situ {

struct GroundingEvalReport {
  std::size_t n = 0;
  std::size_t hits_05m = 0, hits_10m = 0, hits_15deg = 0, hits_30deg = 0;
  double acc_05m = 0, acc_10m = 0, acc_15deg = 0, acc_30deg = 0;
  std::vector<double> position_errors;  // x-y meters
  std::vector<double> yaw_errors;       // degrees
};

// Distance between the x-y components; z is ignored.
double position_error_xy(const Situation& pred, const Situation& gt);

// |wrap(yaw(pred) - yaw(gt))| in degrees, in [0, 180].
double yaw_error_deg(const Situation& pred, const Situation& gt);

// Hits are inclusive (error <= threshold). Throws std::invalid_argument on
// mismatched lengths or an empty input.
GroundingEvalReport evaluate(const std::vector<Situation>& preds, const std::vector<Situation>& gts);

// Uniform position inside the scene's x-y bounding box at eye height, and a
// uniform yaw in [-pi, pi).
Situation random_baseline(const Scene& scene, std::uint64_t seed, double eye_height = 1.5);

// {n, acc_05m, acc_10m, acc_15deg, acc_30deg, position_errors, yaw_errors}
nlohmann::json report_to_json(const GroundingEvalReport& r, bool with_samples = true);

// Aligned table: one row per (method, report), accuracies in percent.
std::string format_report_table(const std::vector<std::pair<std::string, GroundingEvalReport>>& rows);

}  // namespace situ

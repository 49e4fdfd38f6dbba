#include "situ/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "situ/rng.hpp"

namespace situ {

double position_error_xy(const Situation& pred, const Situation& gt) {
  return std::hypot(pred.position.x() - gt.position.x(), pred.position.y() - gt.position.y());
}

double yaw_error_deg(const Situation& pred, const Situation& gt) {
  const double d = wrap_angle(yaw_from_quat(pred.rotation) - yaw_from_quat(gt.rotation));
  return std::abs(d) * 180.0 / std::numbers::pi;
}

GroundingEvalReport evaluate(const std::vector<Situation>& preds, const std::vector<Situation>& gts) {
  if (preds.size() != gts.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                                std::to_string(gts.size()) + " ground truths");
  }
  if (preds.empty()) {
    throw std::invalid_argument("evaluate: no samples");
  }
  GroundingEvalReport r;
  r.n = preds.size();
  r.position_errors.reserve(r.n);
  r.yaw_errors.reserve(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    const double pe = position_error_xy(preds[i], gts[i]);
    const double ye = yaw_error_deg(preds[i], gts[i]);
    r.position_errors.push_back(pe);
    r.yaw_errors.push_back(ye);
    r.hits_05m += pe <= 0.5;
    r.hits_10m += pe <= 1.0;
    r.hits_15deg += ye <= 15.0;
    r.hits_30deg += ye <= 30.0;
  }
  const double n = static_cast<double>(r.n);
  r.acc_05m = r.hits_05m / n;
  r.acc_10m = r.hits_10m / n;
  r.acc_15deg = r.hits_15deg / n;
  r.acc_30deg = r.hits_30deg / n;
  return r;
}

Situation random_baseline(const Scene& scene, std::uint64_t seed, double eye_height) {
  const Bounds2 b = scene_bounds_xy(scene);
  Rng rng(mix_seed(seed, 0xba5e));
  Situation s;
  s.position = {rng.uniform(b.min_x, b.max_x), rng.uniform(b.min_y, b.max_y), eye_height};
  s.rotation = quat_from_yaw(rng.uniform(-std::numbers::pi, std::numbers::pi));
  return s;
}

nlohmann::json report_to_json(const GroundingEvalReport& r, bool with_samples) {
  nlohmann::json j = {{"n", r.n},           {"acc_05m", r.acc_05m},     {"acc_10m", r.acc_10m},
                      {"acc_15deg", r.acc_15deg}, {"acc_30deg", r.acc_30deg}};
  if (with_samples) {
    j["position_errors"] = r.position_errors;
    j["yaw_errors"] = r.yaw_errors;
  }
  return j;
}

std::string format_report_table(const std::vector<std::pair<std::string, GroundingEvalReport>>& rows) {
  std::size_t width = 6;  // "Method"
  for (const auto& [name, _] : rows) {
    width = std::max(width, name.size());
  }
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s  %8s  %6s\n", static_cast<int>(width), "Method",
                "Acc@0.5m", "Acc@1.0m", "Acc@15", "Acc@30", "n");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.1f  %8.1f  %8.1f  %8.1f  %6zu\n", static_cast<int>(width),
                  name.c_str(), 100 * r.acc_05m, 100 * r.acc_10m, 100 * r.acc_15deg, 100 * r.acc_30deg,
                  r.n);
    out += buf;
  }
  return out;
}

}  // namespace situ

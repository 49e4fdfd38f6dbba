#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "situ/cue.hpp"
#include "situ/error.hpp"
#include "situ/geometry.hpp"
#include "situ/grounding.hpp"
#include "situ/model.hpp"

namespace situ {

struct TrainConfig {
  double supervision_radius = 1.5;  // D, meters
  double alpha = 1.0;               // confidence decay, 1/m
  int bins = 12;                    // B
  double w_pos = 1.0;
  double w_rot = 1.0;
  double w_conf = 1.0;
  double learning_rate = 1e-3;
  int epochs = 100;
  int batch_size = 8;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  Variant variant = Variant::kAnchorBins;
  int threads = 1;
  // Adam moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Throws ConfigError listing every invalid field.
void validate(const TrainConfig& cfg);

// Keys: D, alpha, B, w_pos, w_rot, w_conf, learning_rate, epochs, batch_size,
// validation_fraction, seed, variant, beta1, beta2, adam_eps. Missing keys
// keep their defaults; unknown keys and bad values are ConfigErrors naming
// the field. `threads` is a runtime setting and is not serialized.
nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Architecture implied by a training config.
ModelConfig model_config_for(const TrainConfig& cfg, std::vector<std::string> vocabulary);

struct TrainSample {
  std::shared_ptr<const Scene> scene;
  SituationCue cue;
  Situation gt;
};

struct SupervisedSet {
  std::vector<int> indices;  // positions in the anchor list, ascending
  bool fallback = false;     // nothing within D; nearest anchor supervised
};

// {k : |a_k - s| <= D} with the full 3-D norm.
SupervisedSet supervised_set(const std::vector<Anchor>& anchors, const Vec3& gt_pos, double radius);
SupervisedSet supervised_set(const Scene& scene, const Vec3& gt_pos, double radius);

// Sum over k in `supervised` of |a_k + dp_k - s|^2.
double loss_pos(const std::vector<AnchorPrediction>& preds, const std::vector<Anchor>& anchors,
                const Vec3& gt_pos, const std::vector<int>& supervised);

// Anchor-relative yaw target wrap(yaw(s) - yaw(a_k)).
double relative_yaw(const Quaternion& gt_rot, const Anchor& anchor);

// -sum over k in `supervised` of log p_k[target bin], p clamped at 1e-12.
double loss_rot(const std::vector<AnchorPrediction>& preds, const Quaternion& gt_rot,
                const std::vector<Anchor>& anchors, const std::vector<int>& supervised,
                const YawBins& bins);

// exp(-alpha * dist)
double confidence_target(double dist, double alpha);

// Sum over every anchor of |c_k - exp(-alpha |a_k - s|)|.
double loss_conf(const std::vector<AnchorPrediction>& preds, const std::vector<Anchor>& anchors,
                 const Vec3& gt_pos, double alpha);

struct LossBreakdown {
  double pos = 0;
  double rot = 0;
  double conf = 0;
  double total = 0;
  bool fallback = false;
};

// Weighted loss of one sample. When `grad` is given the analytic gradient
// with respect to model.params() is added to it. Throws TrainingDiverged on
// a non-finite loss.
LossBreakdown total_loss(const TrainSample& sample, const Model& model, const TrainConfig& cfg,
                         Eigen::VectorXd* grad = nullptr);

struct EpochLoss {
  int epoch = 0;
  double pos = 0;
  double rot = 0;
  double conf = 0;
  double total = 0;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::vector<EpochLoss> history = {})
      : Error(what), history_(std::move(history)) {}
  const std::vector<EpochLoss>& history() const { return history_; }

 private:
  std::vector<EpochLoss> history_;
};

struct FitResult {
  Model model;                         // snapshot with the best validation loss
  std::vector<EpochLoss> history;      // mean training loss per epoch
  std::vector<double> validation;      // mean validation total per epoch
  int best_epoch = 0;
};

// Minibatch Adam over `dataset`. A seeded validation_fraction of samples is
// held out for snapshot selection (all samples when fewer than two).
// Deterministic for a given seed regardless of cfg.threads.
FitResult fit(const std::vector<TrainSample>& dataset, const TrainConfig& cfg,
              std::vector<std::string> vocabulary);

// CSV with header "epoch,L_pos,L_rot,L_conf,total".
void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history);

}  // namespace situ

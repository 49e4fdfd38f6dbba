#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "situ/cue.hpp"
#include "situ/geometry.hpp"
#include "situ/model.hpp"

namespace situ {

// ---- grounding head MLP: [h_GRD; h_k] -> tanh hidden -> (c, dp, rotation) ----

struct HeadActivations {
  Eigen::VectorXd grd;      // d
  Eigen::MatrixXd anchors;  // d x K (empty for kNoAnchor)
  Eigen::MatrixXd hidden;   // head_hidden x K
};

// Raw head outputs, head_output_dim x K. For kNoAnchor `h_anchors` must be
// empty and a single column is produced.
Eigen::MatrixXd head_forward(const Model& model, const Eigen::VectorXd& h_grd,
                             const Eigen::MatrixXd& h_anchors, HeadActivations* act = nullptr);

// Accumulates parameter gradients; optionally returns input gradients.
void head_backward(const Model& model, const HeadActivations& act, const Eigen::MatrixXd& d_out,
                   Eigen::VectorXd& grad, Eigen::VectorXd* d_grd = nullptr,
                   Eigen::MatrixXd* d_anchors = nullptr);

struct AnchorPrediction {
  int instance_id = -1;
  double confidence = 0.5;          // c_k
  Vec3 offset = Vec3::Zero();       // dp_k
  Eigen::VectorXd bin_logits;       // empty for angle regression
  Eigen::VectorXd bin_probs;
  int bin_argmax = -1;              // lowest index among ties
  double theta = 0.0;               // anchor-relative yaw theta_k, wrapped
};

double sigmoid(double x);
// Max-shifted softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Interprets one column of head output.
AnchorPrediction decode_head_output(const Model& model, const Eigen::VectorXd& out, int instance_id);

// Throws DimensionMismatch unless both features have dimension d.
AnchorPrediction predict_anchor(const Model& model, const Eigen::VectorXd& h_grd,
                                const Eigen::VectorXd& h_k, int instance_id = -1);

// a_k^pos + dp_k
Vec3 anchor_position_estimate(const Anchor& anchor, const AnchorPrediction& pred);

// a^rot ⊗ quat_from_yaw(theta_hat)
Quaternion assemble_rotation(const Anchor& anchor, double theta_hat);

struct GroundingResult {
  std::string scene_id;
  Situation predicted;
  int selected_index = -1;        // k*, position in per_anchor; -1 without anchors
  int selected_instance_id = -1;
  double theta_hat = 0.0;
  std::vector<AnchorPrediction> per_anchor;
};

// Runs the head on every anchor and assembles the pose from the most
// confident one (ties: lowest instance id). Throws InvalidScene when the
// scene has no instances.
GroundingResult ground(const Model& model, const Scene& scene, const SituationCue& cue);

// Selection and assembly from precomputed per-anchor predictions.
GroundingResult assemble_grounding(const Model& model, const Scene& scene,
                                   std::vector<AnchorPrediction> per_anchor);

// {scene_id, k_star, s_pos, s_rot, theta_hat, anchors: [{id, c, dp, bin_argmax}]}
// k_star is the selected instance id (-1 without anchors).
nlohmann::json grounding_to_json(const GroundingResult& r);

}  // namespace situ

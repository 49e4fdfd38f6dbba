#pragma once

#include <Eigen/Core>
#include <vector>

#include "situ/cue.hpp"
#include "situ/geometry.hpp"
#include "situ/model.hpp"

namespace situ {

// Stand-in for the LLM hidden states: h_GRD from a situation cue and one h_k
// per scene instance. Every forward pass can record its activations so the
// matching backward pass accumulates parameter gradients.

struct CueActivations {
  std::vector<int> label_band_tokens;
  std::vector<int> bearing_band_tokens;
  Eigen::VectorXd pooled;
  Eigen::VectorXd hidden;
};

// Per observation: sum of a (label, band) and a (bearing, band) embedding.
// Mean-pooled, then tanh hidden layer, then linear output of width d.
// Throws std::invalid_argument on an instance id missing from `scene` or an
// out-of-range bin.
Eigen::VectorXd encode_cue(const Model& model, const Scene& scene, const SituationCue& cue,
                           CueActivations* act = nullptr);

// Adds d(loss)/d(params) to `grad` given d(loss)/d(h_GRD).
void encode_cue_backward(const Model& model, const CueActivations& act,
                         const Eigen::VectorXd& d_out, Eigen::VectorXd& grad);

// Geometric input of one anchor: [center - centroid (3), bbox_extent (3),
// cos/sin of anchor yaw (2), x-y distance to centroid (1), one-hot label].
Eigen::VectorXd anchor_features(const Model& model, const Instance& instance, const Vec3& centroid);

struct AnchorActivations {
  Eigen::MatrixXd input;   // anchor_input_dim x K
  Eigen::MatrixXd hidden;  // anchor_hidden x K
};

// d x K, one column per scene instance in instance order.
Eigen::MatrixXd encode_anchors(const Model& model, const Scene& scene,
                               AnchorActivations* act = nullptr);
Eigen::VectorXd encode_anchor(const Model& model, const Instance& instance, const Scene& scene);

void encode_anchors_backward(const Model& model, const AnchorActivations& act,
                             const Eigen::MatrixXd& d_out, Eigen::VectorXd& grad);

}  // namespace situ

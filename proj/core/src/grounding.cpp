#include "situ/grounding.hpp"

#include <cmath>
#include <stdexcept>

#include "situ/encoder.hpp"
#include "situ/error.hpp"
#include "situ/scene_io.hpp"

namespace situ {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd head_forward(const Model& model, const VectorXd& h_grd, const MatrixXd& h_anchors,
                      HeadActivations* act) {
  const auto& cfg = model.config();
  const auto& b = model.blocks();
  const int d = cfg.feature_dim;
  if (h_grd.size() != d) {
    throw DimensionMismatch("head: h_GRD has dimension " + std::to_string(h_grd.size()) +
                            ", expected " + std::to_string(d));
  }
  HeadActivations local;
  HeadActivations& a = act ? *act : local;
  a.grd = h_grd;
  const auto w1 = model.view(b.head_w1);
  const auto b1 = model.view(b.head_b1).col(0);
  if (cfg.variant == Variant::kNoAnchor) {
    if (h_anchors.size() != 0) {
      throw DimensionMismatch("head: no-anchor variant takes no anchor features");
    }
    a.anchors.resize(0, 0);
    a.hidden = (w1 * h_grd + b1).array().tanh().matrix();
  } else {
    if (h_anchors.rows() != d) {
      throw DimensionMismatch("head: h_k has dimension " + std::to_string(h_anchors.rows()) +
                              ", expected " + std::to_string(d));
    }
    a.anchors = h_anchors;
    const VectorXd shared = w1.leftCols(d) * h_grd + b1;
    a.hidden = ((w1.rightCols(d) * h_anchors).colwise() + shared).array().tanh().matrix();
  }
  return (model.view(b.head_w2) * a.hidden).colwise() + model.view(b.head_b2).col(0);
}

void head_backward(const Model& model, const HeadActivations& act, const MatrixXd& d_out,
                   VectorXd& grad, VectorXd* d_grd, MatrixXd* d_anchors) {
  const auto& cfg = model.config();
  const auto& b = model.blocks();
  const auto& layout = model.layout();
  const int d = cfg.feature_dim;
  layout.view(grad, b.head_w2).noalias() += d_out * act.hidden.transpose();
  layout.view(grad, b.head_b2) += d_out.rowwise().sum();
  const MatrixXd d_pre =
      ((model.view(b.head_w2).transpose() * d_out).array() * (1.0 - act.hidden.array().square())).matrix();
  const VectorXd d_pre_sum = d_pre.rowwise().sum();
  auto g_w1 = layout.view(grad, b.head_w1);
  const auto w1 = model.view(b.head_w1);
  layout.view(grad, b.head_b1) += d_pre_sum;
  if (cfg.variant == Variant::kNoAnchor) {
    g_w1.noalias() += d_pre_sum * act.grd.transpose();
    if (d_grd) {
      *d_grd = w1.transpose() * d_pre_sum;
    }
    if (d_anchors) {
      d_anchors->resize(0, 0);
    }
    return;
  }
  g_w1.leftCols(d).noalias() += d_pre_sum * act.grd.transpose();
  g_w1.rightCols(d).noalias() += d_pre * act.anchors.transpose();
  if (d_grd) {
    *d_grd = w1.leftCols(d).transpose() * d_pre_sum;
  }
  if (d_anchors) {
    *d_anchors = w1.rightCols(d).transpose() * d_pre;
  }
}

double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

VectorXd softmax(const VectorXd& logits) {
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

namespace {

int argmax_lowest(const VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) {
      best = i;
    }
  }
  return best;
}

}  // namespace

AnchorPrediction decode_head_output(const Model& model, const VectorXd& out, int instance_id) {
  const auto& cfg = model.config();
  if (out.size() != cfg.head_output_dim()) {
    throw DimensionMismatch("head output has dimension " + std::to_string(out.size()));
  }
  const YawBins bins(cfg.bins);
  AnchorPrediction p;
  p.instance_id = instance_id;
  switch (cfg.variant) {
    case Variant::kAnchorBins:
      p.confidence = sigmoid(out[0]);
      p.offset = out.segment<3>(1);
      p.bin_logits = out.tail(cfg.bins);
      p.bin_probs = softmax(p.bin_logits);
      p.bin_argmax = argmax_lowest(p.bin_probs);
      p.theta = bin_to_angle(p.bin_argmax, bins);
      break;
    case Variant::kAngleRegression:
      p.confidence = sigmoid(out[0]);
      p.offset = out.segment<3>(1);
      p.theta = wrap_angle(out[4]);
      break;
    case Variant::kNoAnchor:
      p.confidence = 1.0;
      p.offset = out.head<3>();
      p.bin_logits = out.tail(cfg.bins);
      p.bin_probs = softmax(p.bin_logits);
      p.bin_argmax = argmax_lowest(p.bin_probs);
      p.theta = bin_to_angle(p.bin_argmax, bins);
      break;
  }
  return p;
}

AnchorPrediction predict_anchor(const Model& model, const VectorXd& h_grd, const VectorXd& h_k,
                                int instance_id) {
  if (model.config().variant == Variant::kNoAnchor) {
    throw std::logic_error("predict_anchor: model variant has no anchors");
  }
  const int d = model.config().feature_dim;
  if (h_grd.size() != d || h_k.size() != d) {
    throw DimensionMismatch("predict_anchor: features must both have dimension " + std::to_string(d));
  }
  const MatrixXd out = head_forward(model, h_grd, h_k);
  return decode_head_output(model, out.col(0), instance_id);
}

Vec3 anchor_position_estimate(const Anchor& anchor, const AnchorPrediction& pred) {
  return anchor.position + pred.offset;
}

Quaternion assemble_rotation(const Anchor& anchor, double theta_hat) {
  return quat_mul(anchor.rotation, quat_from_yaw(theta_hat));
}

GroundingResult assemble_grounding(const Model& model, const Scene& scene,
                                   std::vector<AnchorPrediction> per_anchor) {
  GroundingResult r;
  r.scene_id = scene.scene_id;
  if (model.config().variant == Variant::kNoAnchor) {
    if (per_anchor.size() != 1) {
      throw DimensionMismatch("no-anchor grounding expects exactly one prediction");
    }
    const auto& p = per_anchor.front();
    r.theta_hat = p.theta;
    r.predicted.position = scene_centroid(scene) + p.offset;
    r.predicted.rotation = quat_from_yaw(p.theta);
    r.per_anchor = std::move(per_anchor);
    return r;
  }
  const auto anchors = scene_anchors(scene);
  if (anchors.empty()) {
    throw InvalidScene("ground: scene '" + scene.scene_id + "' has no anchors");
  }
  if (per_anchor.size() != anchors.size()) {
    throw DimensionMismatch("ground: one prediction per anchor required");
  }
  int best = 0;
  for (int k = 1; k < static_cast<int>(per_anchor.size()); ++k) {
    const auto& c = per_anchor[k];
    const auto& cur = per_anchor[best];
    if (c.confidence > cur.confidence ||
        (c.confidence == cur.confidence && c.instance_id < cur.instance_id)) {
      best = k;
    }
  }
  const Anchor& a = anchors[best];
  const AnchorPrediction& p = per_anchor[best];
  r.selected_index = best;
  r.selected_instance_id = p.instance_id;
  r.theta_hat = p.theta;
  r.predicted.position = anchor_position_estimate(a, p);
  r.predicted.rotation = assemble_rotation(a, p.theta);
  r.per_anchor = std::move(per_anchor);
  return r;
}

GroundingResult ground(const Model& model, const Scene& scene, const SituationCue& cue) {
  if (scene.instances.empty()) {
    throw InvalidScene("ground: scene '" + scene.scene_id + "' has no instances");
  }
  const VectorXd h_grd = encode_cue(model, scene, cue);
  std::vector<AnchorPrediction> preds;
  if (model.config().variant == Variant::kNoAnchor) {
    const MatrixXd out = head_forward(model, h_grd, MatrixXd());
    preds.push_back(decode_head_output(model, out.col(0), -1));
  } else {
    const MatrixXd h_anchors = encode_anchors(model, scene);
    const MatrixXd out = head_forward(model, h_grd, h_anchors);
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
      preds.push_back(decode_head_output(model, out.col(k), scene.instances[k].id));
    }
  }
  return assemble_grounding(model, scene, std::move(preds));
}

nlohmann::json grounding_to_json(const GroundingResult& r) {
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& p : r.per_anchor) {
    anchors.push_back({{"id", p.instance_id},
                       {"c", p.confidence},
                       {"dp", vec3_to_json(p.offset)},
                       {"bin_argmax", p.bin_argmax}});
  }
  return {{"scene_id", r.scene_id},
          {"k_star", r.selected_instance_id},
          {"s_pos", vec3_to_json(r.predicted.position)},
          {"s_rot", quat_to_json(r.predicted.rotation)},
          {"theta_hat", r.theta_hat},
          {"anchors", std::move(anchors)}};
}

}  // namespace situ

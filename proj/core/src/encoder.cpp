#include "situ/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "situ/error.hpp"

namespace situ {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd encode_cue(const Model& model, const Scene& scene, const SituationCue& cue,
                    CueActivations* act) {
  const auto& cfg = model.config();
  const auto& b = model.blocks();
  if (cue.observations.empty()) {
    throw std::invalid_argument("encode_cue: cue has no observations");
  }
  const auto label_band = model.view(b.cue_label_band);
  const auto bearing_band = model.view(b.cue_bearing_band);

  CueActivations local;
  CueActivations& a = act ? *act : local;
  a.label_band_tokens.clear();
  a.bearing_band_tokens.clear();
  a.pooled = VectorXd::Zero(cfg.feature_dim);
  for (const auto& o : cue.observations) {
    const Instance* inst = scene.find_instance(o.instance_id);
    if (inst == nullptr) {
      throw std::invalid_argument("encode_cue: unknown instance id " + std::to_string(o.instance_id));
    }
    if (o.bearing_bin < 0 || o.bearing_bin >= cfg.bearing_bins || o.distance_band < 0 ||
        o.distance_band >= cfg.distance_bands) {
      throw std::invalid_argument("encode_cue: observation bin out of range");
    }
    const int lb = model.label_index(inst->label) * cfg.distance_bands + o.distance_band;
    const int bb = o.bearing_bin * cfg.distance_bands + o.distance_band;
    a.label_band_tokens.push_back(lb);
    a.bearing_band_tokens.push_back(bb);
    a.pooled += label_band.col(lb) + bearing_band.col(bb);
  }
  a.pooled /= static_cast<double>(cue.observations.size());
  a.hidden = (model.view(b.cue_w1) * a.pooled + model.view(b.cue_b1)).array().tanh().matrix();
  return model.view(b.cue_w2) * a.hidden + model.view(b.cue_b2);
}

void encode_cue_backward(const Model& model, const CueActivations& act, const VectorXd& d_out,
                         VectorXd& grad) {
  const auto& b = model.blocks();
  const auto& layout = model.layout();
  layout.view(grad, b.cue_w2).noalias() += d_out * act.hidden.transpose();
  layout.view(grad, b.cue_b2) += d_out;
  const VectorXd d_pre =
      ((model.view(b.cue_w2).transpose() * d_out).array() * (1.0 - act.hidden.array().square())).matrix();
  layout.view(grad, b.cue_w1).noalias() += d_pre * act.pooled.transpose();
  layout.view(grad, b.cue_b1) += d_pre;
  const VectorXd d_pooled = model.view(b.cue_w1).transpose() * d_pre /
                            static_cast<double>(act.label_band_tokens.size());
  auto g_lb = layout.view(grad, b.cue_label_band);
  auto g_bb = layout.view(grad, b.cue_bearing_band);
  for (std::size_t i = 0; i < act.label_band_tokens.size(); ++i) {
    g_lb.col(act.label_band_tokens[i]) += d_pooled;
    g_bb.col(act.bearing_band_tokens[i]) += d_pooled;
  }
}

VectorXd anchor_features(const Model& model, const Instance& instance, const Vec3& centroid) {
  VectorXd x = VectorXd::Zero(model.config().anchor_input_dim());
  const Vec3 rel = instance.center - centroid;
  const double yaw = yaw_from_quat(anchor_rotation(instance, centroid).rotation);
  x.segment<3>(0) = rel;
  x.segment<3>(3) = instance.bbox_extent;
  x[6] = std::cos(yaw);
  x[7] = std::sin(yaw);
  x[8] = std::hypot(rel.x(), rel.y());
  x[9 + model.label_index(instance.label)] = 1.0;
  return x;
}

MatrixXd encode_anchors(const Model& model, const Scene& scene, AnchorActivations* act) {
  const auto& b = model.blocks();
  if (!b.has_anchor_encoder) {
    throw std::logic_error("encode_anchors: model variant has no anchor encoder");
  }
  const Vec3 centroid = scene_centroid(scene);
  AnchorActivations local;
  AnchorActivations& a = act ? *act : local;
  const auto k = static_cast<Eigen::Index>(scene.instances.size());
  a.input.resize(model.config().anchor_input_dim(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a.input.col(i) = anchor_features(model, scene.instances[i], centroid);
  }
  a.hidden = ((model.view(b.anc_w1) * a.input).colwise() + model.view(b.anc_b1).col(0))
                 .array()
                 .tanh()
                 .matrix();
  return (model.view(b.anc_w2) * a.hidden).colwise() + model.view(b.anc_b2).col(0);
}

VectorXd encode_anchor(const Model& model, const Instance& instance, const Scene& scene) {
  const auto& b = model.blocks();
  if (!b.has_anchor_encoder) {
    throw std::logic_error("encode_anchor: model variant has no anchor encoder");
  }
  const VectorXd x = anchor_features(model, instance, scene_centroid(scene));
  const VectorXd h = (model.view(b.anc_w1) * x + model.view(b.anc_b1)).array().tanh().matrix();
  return model.view(b.anc_w2) * h + model.view(b.anc_b2);
}

void encode_anchors_backward(const Model& model, const AnchorActivations& act, const MatrixXd& d_out,
                             VectorXd& grad) {
  const auto& b = model.blocks();
  const auto& layout = model.layout();
  layout.view(grad, b.anc_w2).noalias() += d_out * act.hidden.transpose();
  layout.view(grad, b.anc_b2) += d_out.rowwise().sum();
  const MatrixXd d_pre =
      ((model.view(b.anc_w2).transpose() * d_out).array() * (1.0 - act.hidden.array().square())).matrix();
  layout.view(grad, b.anc_w1).noalias() += d_pre * act.input.transpose();
  layout.view(grad, b.anc_b1) += d_pre.rowwise().sum();
}

}  // namespace situ

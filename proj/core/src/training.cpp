#include "situ/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "situ/encoder.hpp"
#include "situ/parallel.hpp"
#include "situ/rng.hpp"

namespace situ {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate(const TrainConfig& cfg) {
  std::string bad;
  auto flag = [&](bool ok, const char* field) {
    if (!ok) {
      bad += bad.empty() ? field : std::string(", ") + field;
    }
  };
  auto finite = [](double v) { return std::isfinite(v); };
  flag(finite(cfg.supervision_radius) && cfg.supervision_radius > 0, "D");
  flag(finite(cfg.alpha) && cfg.alpha > 0, "alpha");
  flag(cfg.bins >= 2, "B");
  flag(finite(cfg.w_pos) && cfg.w_pos >= 0, "w_pos");
  flag(finite(cfg.w_rot) && cfg.w_rot >= 0, "w_rot");
  flag(finite(cfg.w_conf) && cfg.w_conf >= 0, "w_conf");
  flag(finite(cfg.learning_rate) && cfg.learning_rate > 0, "learning_rate");
  flag(cfg.epochs >= 1, "epochs");
  flag(cfg.batch_size >= 1, "batch_size");
  flag(cfg.validation_fraction >= 0 && cfg.validation_fraction < 1, "validation_fraction");
  flag(cfg.beta1 >= 0 && cfg.beta1 < 1, "beta1");
  flag(cfg.beta2 >= 0 && cfg.beta2 < 1, "beta2");
  flag(finite(cfg.adam_eps) && cfg.adam_eps > 0, "adam_eps");
  if (!bad.empty()) {
    throw ConfigError("invalid training config: " + bad);
  }
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"D", cfg.supervision_radius},
          {"alpha", cfg.alpha},
          {"B", cfg.bins},
          {"w_pos", cfg.w_pos},
          {"w_rot", cfg.w_rot},
          {"w_conf", cfg.w_conf},
          {"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"validation_fraction", cfg.validation_fraction},
          {"seed", cfg.seed},
          {"variant", std::string(variant_name(cfg.variant))},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"adam_eps", cfg.adam_eps}};
}

namespace {

double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ConfigError("training config field '" + key + "' must be a number");
  }
  return v.get<double>();
}

int get_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ConfigError("training config field '" + key + "' must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError("training config field '" + key + "' is out of range");
  }
  return static_cast<int>(x);
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("training config must be a JSON object");
  }
  TrainConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "D") cfg.supervision_radius = get_number(v, key);
    else if (key == "alpha") cfg.alpha = get_number(v, key);
    else if (key == "B") cfg.bins = get_int(v, key);
    else if (key == "w_pos") cfg.w_pos = get_number(v, key);
    else if (key == "w_rot") cfg.w_rot = get_number(v, key);
    else if (key == "w_conf") cfg.w_conf = get_number(v, key);
    else if (key == "learning_rate") cfg.learning_rate = get_number(v, key);
    else if (key == "epochs") cfg.epochs = get_int(v, key);
    else if (key == "batch_size") cfg.batch_size = get_int(v, key);
    else if (key == "validation_fraction") cfg.validation_fraction = get_number(v, key);
    else if (key == "beta1") cfg.beta1 = get_number(v, key);
    else if (key == "beta2") cfg.beta2 = get_number(v, key);
    else if (key == "adam_eps") cfg.adam_eps = get_number(v, key);
    else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("training config field 'seed' must be a non-negative integer");
      }
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "variant") {
      if (!v.is_string()) {
        throw ConfigError("training config field 'variant' must be a string");
      }
      cfg.variant = variant_from_name(v.get<std::string>());
    } else {
      throw ConfigError("unknown training config field '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

ModelConfig model_config_for(const TrainConfig& cfg, std::vector<std::string> vocabulary) {
  ModelConfig m;
  m.variant = cfg.variant;
  m.bins = cfg.bins;
  m.vocabulary = std::move(vocabulary);
  return m;
}

SupervisedSet supervised_set(const std::vector<Anchor>& anchors, const Vec3& gt_pos, double radius) {
  SupervisedSet out;
  if (anchors.empty()) {
    return out;
  }
  int nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(anchors.size()); ++k) {
    const double d = (anchors[k].position - gt_pos).norm();
    if (d <= radius) {
      out.indices.push_back(k);
    }
    if (d < nearest_d) {
      nearest_d = d;
      nearest = k;
    }
  }
  if (out.indices.empty()) {
    out.indices.push_back(nearest);
    out.fallback = true;
  }
  return out;
}

SupervisedSet supervised_set(const Scene& scene, const Vec3& gt_pos, double radius) {
  return supervised_set(scene_anchors(scene), gt_pos, radius);
}

double loss_pos(const std::vector<AnchorPrediction>& preds, const std::vector<Anchor>& anchors,
                const Vec3& gt_pos, const std::vector<int>& supervised) {
  double sum = 0;
  for (int k : supervised) {
    sum += (anchors.at(k).position + preds.at(k).offset - gt_pos).squaredNorm();
  }
  return sum;
}

double relative_yaw(const Quaternion& gt_rot, const Anchor& anchor) {
  return wrap_angle(yaw_from_quat(gt_rot) - yaw_from_quat(anchor.rotation));
}

namespace {

constexpr double kProbFloor = 1e-12;

}  // namespace

double loss_rot(const std::vector<AnchorPrediction>& preds, const Quaternion& gt_rot,
                const std::vector<Anchor>& anchors, const std::vector<int>& supervised,
                const YawBins& bins) {
  double sum = 0;
  for (int k : supervised) {
    const auto& p = preds.at(k);
    if (p.bin_probs.size() != bins.count()) {
      throw DimensionMismatch("loss_rot: prediction has " + std::to_string(p.bin_probs.size()) +
                              " bins, expected " + std::to_string(bins.count()));
    }
    const int target = angle_to_bin(relative_yaw(gt_rot, anchors.at(k)), bins);
    sum -= std::log(std::max(p.bin_probs[target], kProbFloor));
  }
  return sum;
}

double confidence_target(double dist, double alpha) { return std::exp(-alpha * dist); }

double loss_conf(const std::vector<AnchorPrediction>& preds, const std::vector<Anchor>& anchors,
                 const Vec3& gt_pos, double alpha) {
  double sum = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    const double target = confidence_target((anchors.at(k).position - gt_pos).norm(), alpha);
    sum += std::abs(preds[k].confidence - target);
  }
  return sum;
}

namespace {

double sign(double x) { return static_cast<double>((x > 0) - (x < 0)); }

LossBreakdown no_anchor_loss(const TrainSample& sample, const Model& model, const TrainConfig& cfg,
                             VectorXd* grad) {
  const auto& mcfg = model.config();
  const Scene& scene = *sample.scene;
  CueActivations cue_act;
  HeadActivations head_act;
  const VectorXd h_grd = encode_cue(model, scene, sample.cue, grad ? &cue_act : nullptr);
  const MatrixXd out = head_forward(model, h_grd, MatrixXd(), grad ? &head_act : nullptr);
  const AnchorPrediction p = decode_head_output(model, out.col(0), -1);

  const YawBins bins(mcfg.bins);
  const Vec3 err = scene_centroid(scene) + p.offset - sample.gt.position;
  const int target = angle_to_bin(yaw_from_quat(sample.gt.rotation), bins);

  LossBreakdown l;
  l.pos = err.squaredNorm();
  l.rot = -std::log(std::max(p.bin_probs[target], kProbFloor));
  l.total = cfg.w_pos * l.pos + cfg.w_rot * l.rot;
  if (!std::isfinite(l.total)) {
    throw TrainingDiverged("non-finite loss on scene '" + scene.scene_id + "'");
  }
  if (grad) {
    MatrixXd d_out = MatrixXd::Zero(out.rows(), 1);
    d_out.block<3, 1>(0, 0) = 2.0 * cfg.w_pos * err;
    VectorXd d_logits = p.bin_probs;
    d_logits[target] -= 1.0;
    d_out.block(3, 0, mcfg.bins, 1) = cfg.w_rot * d_logits;
    VectorXd d_grd;
    head_backward(model, head_act, d_out, *grad, &d_grd);
    encode_cue_backward(model, cue_act, d_grd, *grad);
  }
  return l;
}

}  // namespace

LossBreakdown total_loss(const TrainSample& sample, const Model& model, const TrainConfig& cfg,
                         VectorXd* grad) {
  if (!sample.scene) {
    throw std::invalid_argument("total_loss: sample has no scene");
  }
  const auto& mcfg = model.config();
  if (mcfg.bins != cfg.bins || mcfg.variant != cfg.variant) {
    throw DimensionMismatch("total_loss: model and training config disagree on bins or variant");
  }
  if (grad && grad->size() != model.params().size()) {
    throw DimensionMismatch("total_loss: gradient buffer has the wrong size");
  }
  if (mcfg.variant == Variant::kNoAnchor) {
    return no_anchor_loss(sample, model, cfg, grad);
  }

  const Scene& scene = *sample.scene;
  const auto anchors = scene_anchors(scene);
  CueActivations cue_act;
  AnchorActivations anc_act;
  HeadActivations head_act;
  const VectorXd h_grd = encode_cue(model, scene, sample.cue, grad ? &cue_act : nullptr);
  const MatrixXd h_anchors = encode_anchors(model, scene, grad ? &anc_act : nullptr);
  const MatrixXd out = head_forward(model, h_grd, h_anchors, grad ? &head_act : nullptr);
  const int K = static_cast<int>(anchors.size());
  std::vector<AnchorPrediction> preds;
  preds.reserve(K);
  for (int k = 0; k < K; ++k) {
    preds.push_back(decode_head_output(model, out.col(k), anchors[k].instance_id));
  }

  const Vec3& s = sample.gt.position;
  const SupervisedSet sup = supervised_set(anchors, s, cfg.supervision_radius);
  const YawBins bins(mcfg.bins);
  const bool regression = mcfg.variant == Variant::kAngleRegression;

  LossBreakdown l;
  l.fallback = sup.fallback;
  l.pos = loss_pos(preds, anchors, s, sup.indices);
  std::vector<double> rel(K, 0.0);
  for (int k : sup.indices) {
    rel[k] = relative_yaw(sample.gt.rotation, anchors[k]);
  }
  if (regression) {
    for (int k : sup.indices) {
      const double e = out(4, k) - rel[k];
      l.rot += e * e;
    }
  } else {
    l.rot = loss_rot(preds, sample.gt.rotation, anchors, sup.indices, bins);
  }
  l.conf = loss_conf(preds, anchors, s, cfg.alpha);
  l.total = cfg.w_pos * l.pos + cfg.w_rot * l.rot + cfg.w_conf * l.conf;
  if (!std::isfinite(l.total)) {
    throw TrainingDiverged("non-finite loss on scene '" + scene.scene_id + "'");
  }
  if (!grad) {
    return l;
  }

  MatrixXd d_out = MatrixXd::Zero(out.rows(), K);
  for (int k = 0; k < K; ++k) {
    const double c = preds[k].confidence;
    const double target = confidence_target((anchors[k].position - s).norm(), cfg.alpha);
    d_out(0, k) = cfg.w_conf * sign(c - target) * c * (1.0 - c);
  }
  for (int k : sup.indices) {
    d_out.block<3, 1>(1, k) = 2.0 * cfg.w_pos * (anchors[k].position + preds[k].offset - s);
    if (regression) {
      d_out(4, k) = 2.0 * cfg.w_rot * (out(4, k) - rel[k]);
    } else {
      VectorXd d_logits = preds[k].bin_probs;
      d_logits[angle_to_bin(rel[k], bins)] -= 1.0;
      d_out.block(4, k, mcfg.bins, 1) = cfg.w_rot * d_logits;
    }
  }
  VectorXd d_grd;
  MatrixXd d_anchors;
  head_backward(model, head_act, d_out, *grad, &d_grd, &d_anchors);
  encode_anchors_backward(model, anc_act, d_anchors, *grad);
  encode_cue_backward(model, cue_act, d_grd, *grad);
  return l;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

FitResult fit(const std::vector<TrainSample>& dataset, const TrainConfig& cfg,
              std::vector<std::string> vocabulary) {
  validate(cfg);
  if (dataset.empty()) {
    throw ConfigError("fit: training set is empty");
  }
  Model model = Model::initialized(model_config_for(cfg, std::move(vocabulary)), cfg.seed);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(mix_seed(cfg.seed, 0x5b117));
  shuffle(order, split_rng);
  std::size_t n_val = 0;
  if (dataset.size() >= 2) {
    n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * dataset.size()));
    n_val = std::min(n_val, dataset.size() - 1);
  }
  std::vector<std::size_t> val(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train(order.begin() + n_val, order.end());
  if (val.empty()) {
    val = train;
  }
  std::sort(val.begin(), val.end());

  const auto n_params = model.params().size();
  VectorXd m = VectorXd::Zero(n_params);
  VectorXd v = VectorXd::Zero(n_params);
  std::int64_t step = 0;
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5f0f));

  FitResult result{model, {}, {}, 0};
  double best_val = std::numeric_limits<double>::infinity();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<VectorXd> grads(batch, VectorXd::Zero(n_params));
  std::vector<LossBreakdown> losses(batch);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(train, shuffle_rng);
    EpochLoss e;
    e.epoch = epoch;
    try {
      for (std::size_t start = 0; start < train.size(); start += batch) {
        const std::size_t n = std::min(batch, train.size() - start);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
          grads[i].setZero();
          losses[i] = total_loss(dataset[train[start + i]], model, cfg, &grads[i]);
        });
        VectorXd g = grads[0];
        for (std::size_t i = 1; i < n; ++i) {
          g += grads[i];
        }
        g /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          e.pos += losses[i].pos;
          e.rot += losses[i].rot;
          e.conf += losses[i].conf;
          e.total += losses[i].total;
        }
        if (!g.allFinite()) {
          throw TrainingDiverged("non-finite gradient in epoch " + std::to_string(epoch));
        }
        ++step;
        m = cfg.beta1 * m + (1 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g.cwiseAbs2();
        const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(step));
        model.params().array() -= cfg.learning_rate * (m.array() / c1) /
                                  ((v.array() / c2).sqrt() + cfg.adam_eps);
      }
      const double nt = static_cast<double>(train.size());
      e.pos /= nt;
      e.rot /= nt;
      e.conf /= nt;
      e.total /= nt;

      std::vector<double> val_loss(val.size());
      parallel_for(val.size(), cfg.threads, [&](std::size_t i) {
        val_loss[i] = total_loss(dataset[val[i]], model, cfg).total;
      });
      double vsum = 0;
      for (double x : val_loss) {
        vsum += x;
      }
      const double vmean = vsum / static_cast<double>(val.size());
      result.history.push_back(e);
      result.validation.push_back(vmean);
      if (vmean < best_val) {
        best_val = vmean;
        result.model = model;
        result.best_epoch = epoch;
      }
    } catch (const TrainingDiverged& ex) {
      throw TrainingDiverged(ex.what(), result.history);
    }
  }
  return result;
}

void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out.precision(10);
  out << "epoch,L_pos,L_rot,L_conf,total\n";
  for (const auto& e : history) {
    out << e.epoch << ',' << e.pos << ',' << e.rot << ',' << e.conf << ',' << e.total << '\n';
  }
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

}  // namespace situ

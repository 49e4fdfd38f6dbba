#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gradcheck.hpp"
#include "situ/corpus.hpp"
#include "situ/error.hpp"
#include "situ/synthetic.hpp"
#include "situ/training.hpp"
#include "support.hpp"

using namespace situ;
using situ::testing::check_gradient;
using situ::testing::make_scene;

namespace {

std::vector<Anchor> anchors_at(const std::vector<Vec3>& ps) {
  std::vector<Anchor> out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    out.push_back({static_cast<int>(i), ps[i], Quaternion::identity()});
  }
  return out;
}

AnchorPrediction pred(Vec3 offset, double c = 0.5, int bins = 12) {
  AnchorPrediction p;
  p.offset = offset;
  p.confidence = c;
  p.bin_logits = Eigen::VectorXd::Zero(bins);
  p.bin_probs = Eigen::VectorXd::Constant(bins, 1.0 / bins);
  return p;
}

}  // namespace

TEST(SupervisedSet, Membership) {
  const auto a = anchors_at({{0.5, 0, 0}, {1.5, 0, 0}, {3, 0, 0}});
  const auto s = supervised_set(a, Vec3::Zero(), 1.5);
  EXPECT_EQ(s.indices, (std::vector<int>{0, 1}));  // distance exactly D included
  EXPECT_FALSE(s.fallback);
}

TEST(SupervisedSet, UsesFull3dNorm) {
  const auto a = anchors_at({{1.0, 0, 0}});
  EXPECT_TRUE(supervised_set(a, {0, 0, 1.5}, 1.5).fallback);  // xy 1.0 but 3-D 1.80
}

TEST(SupervisedSet, FallsBackToNearest) {
  const auto a = anchors_at({{9, 0, 0}, {0, 5, 0}, {7, 7, 0}});
  const auto s = supervised_set(a, Vec3::Zero(), 1.5);
  EXPECT_EQ(s.indices, std::vector<int>{1});
  EXPECT_TRUE(s.fallback);
}

TEST(LossPos, Examples) {
  const auto a = anchors_at({{0, 0, 0}, {0, 0, 0}});
  EXPECT_DOUBLE_EQ(loss_pos({pred({0, 0, 0})}, a, Vec3::Zero(), {0}), 0.0);
  EXPECT_DOUBLE_EQ(loss_pos({pred({1, 0, 0})}, a, Vec3::Zero(), {0}), 1.0);
  EXPECT_DOUBLE_EQ(loss_pos({pred({1, 0, 0}), pred({0, 2, 0})}, a, Vec3::Zero(), {0, 1}), 5.0);
}

TEST(LossRot, Examples) {
  const auto a = anchors_at({{0, 0, 0}, {1, 0, 0}});
  const YawBins bins(12);
  EXPECT_NEAR(loss_rot({pred({0, 0, 0})}, Quaternion::identity(), a, {0}, bins), std::log(12.0), 1e-12);
  EXPECT_NEAR(loss_rot({pred({0, 0, 0}), pred({0, 0, 0})}, Quaternion::identity(), a, {0, 1}, bins),
              2 * std::log(12.0), 1e-12);

  AnchorPrediction sure = pred({0, 0, 0});
  sure.bin_probs.setZero();
  sure.bin_probs[angle_to_bin(0.0, bins)] = 1.0;
  EXPECT_DOUBLE_EQ(loss_rot({sure}, Quaternion::identity(), a, {0}, bins), 0.0);

  AnchorPrediction wrong = pred({0, 0, 0});
  wrong.bin_probs.setZero();
  wrong.bin_probs[0] = 1.0;
  EXPECT_NEAR(loss_rot({wrong}, Quaternion::identity(), a, {0}, bins), -std::log(1e-12), 1e-9);
}

TEST(LossRot, TargetIsRelativeToAnchor) {
  Anchor a{0, Vec3::Zero(), quat_from_yaw(std::numbers::pi / 2)};
  EXPECT_NEAR(relative_yaw(quat_from_yaw(0.0), a), -std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(relative_yaw(quat_from_yaw(-3.0), a), wrap_angle(-3.0 - std::numbers::pi / 2), 1e-12);
}

TEST(LossRot, BinCountMismatch) {
  const auto a = anchors_at({{0, 0, 0}});
  EXPECT_THROW(loss_rot({pred({0, 0, 0}, 0.5, 8)}, Quaternion::identity(), a, {0}, YawBins(12)),
               DimensionMismatch);
}

TEST(ConfidenceTarget, Examples) {
  EXPECT_DOUBLE_EQ(confidence_target(0.0, 1.0), 1.0);
  EXPECT_NEAR(confidence_target(1.0, 1.0), 0.36788, 1e-5);
  double prev = 2.0;
  for (double d = 0; d < 10; d += 0.25) {
    const double t = confidence_target(d, 1.0);
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(LossConf, Examples) {
  const auto a = anchors_at({{0, 0, 0}});
  EXPECT_DOUBLE_EQ(loss_conf({pred({0, 0, 0}, 1.0)}, a, Vec3::Zero(), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(loss_conf({pred({0, 0, 0}, 0.5)}, a, Vec3::Zero(), 1.0), 0.5);
}

TEST(LossConf, SumsOverAllAnchors) {
  // distances 0, 1, 2 and 5: every anchor counts, inside D or not
  const auto a = anchors_at({{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {3, 4, 0}});
  const std::vector<AnchorPrediction> p = {pred({}, 0.9), pred({}, 0.1), pred({}, 0.2), pred({}, 0.3)};
  const double want = std::abs(0.9 - 1.0) + std::abs(0.1 - std::exp(-1.0)) +
                      std::abs(0.2 - std::exp(-2.0)) + std::abs(0.3 - std::exp(-5.0));
  EXPECT_NEAR(loss_conf(p, a, Vec3::Zero(), 1.0), want, 1e-15);
}

TEST(Losses, OnlySupervisedAnchorsAffectPosAndRot) {
  const auto a = anchors_at({{0, 0, 0}, {5, 0, 0}});
  const YawBins bins(12);
  std::vector<AnchorPrediction> p = {pred({0.1, 0, 0}), pred({0.2, 0, 0})};
  const auto k = supervised_set(a, Vec3::Zero(), 1.5).indices;
  const double lp = loss_pos(p, a, Vec3::Zero(), k);
  const double lr = loss_rot(p, Quaternion::identity(), a, k, bins);
  const double lc = loss_conf(p, a, Vec3::Zero(), 1.0);
  p[1].offset = {7, 7, 7};
  p[1].bin_probs = Eigen::VectorXd::Unit(12, 3);
  p[1].confidence = 0.99;
  EXPECT_EQ(loss_pos(p, a, Vec3::Zero(), k), lp);
  EXPECT_EQ(loss_rot(p, Quaternion::identity(), a, k, bins), lr);
  EXPECT_NE(loss_conf(p, a, Vec3::Zero(), 1.0), lc);
}

class TotalLossTest : public ::testing::TestWithParam<Variant> {};

TEST_P(TotalLossTest, GradientMatchesFiniteDifferences) {
  const auto samples = synthetic_split(3, 2, 77);
  TrainConfig cfg;
  cfg.variant = GetParam();
  Model m = Model::initialized(model_config_for(cfg, default_vocabulary()), 5);
  // move off the initial point so the probe sees trained-like magnitudes
  std::mt19937_64 g(1);
  std::normal_distribution<double> n(0.0, 0.05);
  for (auto& x : m.params()) {
    x += n(g);
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.params().size());
    total_loss(samples[i], m, cfg, &grad);
    Eigen::VectorXd x = m.params();
    auto f = [&] {
      m.params() = x;
      return total_loss(samples[i], m, cfg).total;
    };
    const auto res = check_gradient(x, grad, f, 40, 100 + i);
    m.params() = x;
    EXPECT_LT(res.worst, 1e-4) << variant_name(GetParam()) << " sample " << i << " index "
                               << res.worst_index;
  }
}

TEST_P(TotalLossTest, WeightsSelectTerms) {
  const auto samples = synthetic_split(1, 1, 3);
  TrainConfig cfg;
  cfg.variant = GetParam();
  const Model m = Model::initialized(model_config_for(cfg, default_vocabulary()), 5);
  const LossBreakdown full = total_loss(samples[0], m, cfg);
  EXPECT_NEAR(full.total, full.pos + full.rot + full.conf, 1e-12);

  TrainConfig only_pos = cfg;
  only_pos.w_rot = only_pos.w_conf = 0;
  EXPECT_NEAR(total_loss(samples[0], m, only_pos).total, full.pos, 1e-12);

  TrainConfig none = cfg;
  none.w_pos = none.w_rot = none.w_conf = 0;
  EXPECT_EQ(total_loss(samples[0], m, none).total, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Variants, TotalLossTest,
                         ::testing::Values(Variant::kAnchorBins, Variant::kAngleRegression,
                                           Variant::kNoAnchor),
                         [](const auto& info) { return std::string(variant_name(info.param)); });

TEST(TotalLoss, ModelConfigMismatch) {
  const auto samples = synthetic_split(1, 1, 3);
  TrainConfig cfg;
  const Model m = Model::initialized(model_config_for(cfg, default_vocabulary()), 5);
  TrainConfig other = cfg;
  other.bins = 8;
  EXPECT_THROW(total_loss(samples[0], m, other), DimensionMismatch);
}

TEST(TrainConfigJson, RoundTripAndErrors) {
  TrainConfig cfg;
  cfg.supervision_radius = 2.0;
  cfg.variant = Variant::kAngleRegression;
  cfg.seed = 12;
  const TrainConfig back = train_config_from_json(train_config_to_json(cfg));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(cfg));

  EXPECT_THROW(train_config_from_json({{"D", -1.0}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"variant", "nope"}}), ConfigError);
  try {
    train_config_from_json({{"alpha", 0.0}, {"B", 1}});
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("alpha"), std::string::npos);
    EXPECT_NE(what.find("B"), std::string::npos);
  }
}

TEST(TrainConfigJson, DefaultsFromEmptyObject) {
  const TrainConfig c = train_config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.supervision_radius, 1.5);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.bins, 12);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.epochs, 100);
  EXPECT_EQ(c.w_pos, 1.0);
  EXPECT_EQ(c.w_rot, 1.0);
  EXPECT_EQ(c.w_conf, 1.0);
}

TEST(Fit, OverfitsOneSample) {
  const auto samples = synthetic_split(1, 1, 21);
  TrainConfig cfg;
  cfg.epochs = 1500;
  cfg.batch_size = 1;
  cfg.learning_rate = 3e-3;
  const Model init = Model::initialized(model_config_for(cfg, default_vocabulary()), cfg.seed);
  const double before = total_loss(samples[0], init, cfg).total;
  const FitResult r = fit(samples, cfg, default_vocabulary());
  ASSERT_EQ(r.history.size(), 1500u);
  EXPECT_LT(r.history.back().total, 0.1 * before);
}

TEST(Fit, BitIdenticalForSeedAndThreads) {
  const auto samples = synthetic_split(6, 3, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  const FitResult a = fit(samples, cfg, default_vocabulary());
  const FitResult b = fit(samples, cfg, default_vocabulary());
  cfg.threads = 3;
  const FitResult c = fit(samples, cfg, default_vocabulary());
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].total, b.history[i].total);
    EXPECT_EQ(a.history[i].total, c.history[i].total);
  }
  EXPECT_EQ(a.model.params(), b.model.params());
  EXPECT_EQ(a.model.params(), c.model.params());
  EXPECT_EQ(a.best_epoch, c.best_epoch);
}

TEST(Fit, ReturnsBestValidationSnapshot) {
  const auto samples = synthetic_split(6, 3, 4);
  TrainConfig cfg;
  cfg.epochs = 4;
  const FitResult r = fit(samples, cfg, default_vocabulary());
  ASSERT_EQ(r.validation.size(), 4u);
  const auto best = std::min_element(r.validation.begin(), r.validation.end()) - r.validation.begin();
  EXPECT_EQ(r.best_epoch, best + 1);
}

TEST(Fit, RejectsEmptyAndInvalid) {
  TrainConfig cfg;
  EXPECT_THROW(fit({}, cfg, default_vocabulary()), ConfigError);
  cfg.learning_rate = -1;
  EXPECT_THROW(fit(synthetic_split(1, 1, 1), cfg, default_vocabulary()), ConfigError);
}

TEST(Fit, DivergenceCarriesHistory) {
  const auto samples = synthetic_split(2, 2, 4);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e300;
  try {
    fit(samples, cfg, default_vocabulary());
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_LT(e.history().size(), 50u);
  }
}

TEST(LossHistory, CsvLayout) {
  const auto path = std::filesystem::temp_directory_path() / "situ_loss_history.csv";
  write_loss_history(path, {{1, 0.5, 0.25, 0.125, 0.875}, {2, 0.4, 0.2, 0.1, 0.7}});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "epoch,L_pos,L_rot,L_conf,total");
  EXPECT_EQ(row, "1,0.5,0.25,0.125,0.875");
  std::filesystem::remove(path);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "situ/dataset.hpp"
#include "situ/error.hpp"
#include "situ/region.hpp"
#include "situ/rng.hpp"
#include "support.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

using namespace situ;
using situ::testing::make_scene;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("situ_test_" + name);
}

QaItem qa(std::string q, std::string a, double rank,
          QaCategory c = QaCategory::kObjectIdentification) {
  return {std::move(q), std::move(a), c, rank};
}

SituationRecord random_record(Rng& rng, int i) {
  SituationRecord r;
  r.scene_id = "scene_" + std::to_string(i % 7);
  r.frame_id = "frame_" + std::to_string(i);
  r.situation = {{rng.uniform(-5, 5), rng.uniform(-5, 5), 1.5}, quat_from_yaw(rng.uniform(-3, 3))};
  r.region.scene_id = r.scene_id;
  r.region.frame_id = r.frame_id;
  for (int k = 0; k < i % 9; ++k) {
    r.region.point_indices.push_back(k * 3 + i);
  }
  r.region.visible_instance_ids = {i % 4, i % 4 + 1};
  r.region.depth_tol = 0.05;
  r.region.min_visible_fraction = 0.1;
  r.caption_simple = "A chair is in view.";
  r.caption_detailed = i % 3 == 0 ? "" : "A chair is in view about " + std::to_string(i) + " meters.";
  for (int k = 0; k < i % 5; ++k) {
    r.qa.push_back(qa("What is " + std::to_string(k) + "?", "thing", rng.uniform(0, 5),
                      kQaCategories[k % 4]));
  }
  r.caption_missing = i % 11 == 0;
  if (i % 4 == 0) {
    r.action = nlohmann::json{{"type", "walk"}, {"meters", 2}};
  }
  if (i % 5 == 0) {
    r.verification = Verification{4, 3.5, 2, 3, i % 10 == 0 ? std::optional<std::string>("ok") : std::nullopt};
  }
  return r;
}

// Camera at the origin looking along +x, pitch zero.
CameraFrame frame_at_origin(double depth, int w = 40, int h = 30) {
  CameraFrame f;
  f.frame_id = "f0";
  f.extrinsic = extrinsic_from_situation({{0, 0, 1.5}, Quaternion::identity()}, 0.0);
  f.intrinsic = {20, 20, 20, 15};
  f.width = w;
  f.height = h;
  f.depth.assign(static_cast<std::size_t>(w) * h, depth);
  return f;
}

}  // namespace

TEST(Records, RoundTripHundred) {
  Rng rng(3);
  std::vector<SituationRecord> recs;
  for (int i = 0; i < 100; ++i) {
    recs.push_back(random_record(rng, i));
  }
  const auto path = temp_file("records.jsonl");
  write_records(path, recs);
  const auto back = load_records(path);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i], recs[i]) << i;
  }
  fs::remove(path);
}

TEST(Records, TruncatedLineReportsLineNumber) {
  Rng rng(3);
  const auto path = temp_file("trunc.jsonl");
  {
    std::ofstream out(path);
    out << record_to_json(random_record(rng, 1)).dump() << '\n';
    out << record_to_json(random_record(rng, 2)).dump() << '\n';
    const std::string third = record_to_json(random_record(rng, 3)).dump();
    out << third.substr(0, third.size() / 2) << '\n';
  }
  try {
    load_records(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  fs::remove(path);
}

TEST(Records, UnknownFieldsSurvive) {
  Rng rng(3);
  nlohmann::json j = record_to_json(random_record(rng, 1));
  j["annotator"] = {{"name", "x"}, {"pass", 2}};
  const SituationRecord r = record_from_json(j);
  EXPECT_EQ(record_to_json(r), j);
}

TEST(Records, ValidateRejectsBadValues) {
  Rng rng(3);
  SituationRecord r = random_record(rng, 1);
  r.situation.rotation = Quaternion(0, 0, 0, 2);
  EXPECT_THROW(validate_record(r), std::invalid_argument);
  r = random_record(rng, 1);
  r.qa = {qa("q", "a", 5.5)};
  EXPECT_THROW(validate_record(r), std::invalid_argument);
}

TEST(RankFilter, Examples) {
  EXPECT_TRUE(rank_filter_qa({}).empty());
  const std::vector<QaItem> all_high = {qa("a", "1", 3.0), qa("b", "2", 5.0)};
  EXPECT_EQ(rank_filter_qa(all_high), all_high);

  const std::vector<QaItem> mixed = {qa("a", "1", 4.0), qa("b", "2", 2.9), qa("c", "3", 3.0),
                                     qa("d", "4", 0.0), qa("e", "5", 3.5)};
  const auto kept = rank_filter_qa(mixed, 3.0);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].question, "a");
  EXPECT_EQ(kept[1].question, "c");
  EXPECT_EQ(kept[2].question, "e");
  EXPECT_EQ(rank_filter_qa(mixed, 0.0), mixed);
}

TEST(Verify, MockScorerAndImmutability) {
  Rng rng(3);
  const SituationRecord r = random_record(rng, 1);
  const SituationRecord copy = r;
  MockScorer scorer(4.0, std::string(" (refined)"));
  const auto v = verify_record(r, scorer);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->score, 4.0);
  EXPECT_EQ(v->correctness, 4.0);
  EXPECT_EQ(*v->refined_caption, r.caption_detailed + " (refined)");
  EXPECT_EQ(r, copy);
}

TEST(Verify, ScorerFailureIsNullopt) {
  struct Failing : Scorer {
    Verification score(const VerifyRequest&) override { throw ProviderError("down"); }
  } failing;
  struct OutOfRange : Scorer {
    Verification score(const VerifyRequest&) override { return {6, 1, 1, 1, std::nullopt}; }
  } bad;
  Rng rng(3);
  const SituationRecord r = random_record(rng, 1);
  EXPECT_FALSE(verify_record(r, failing).has_value());
  EXPECT_FALSE(verify_record(r, bad).has_value());
}

TEST(Verify, NoCaptionsRejected) {
  Rng rng(3);
  SituationRecord r = random_record(rng, 1);
  r.caption_simple.clear();
  r.caption_detailed.clear();
  MockScorer scorer;
  EXPECT_THROW(verify_record(r, scorer), std::invalid_argument);
}

TEST(Stats, Examples) {
  SituationRecord a;
  a.scene_id = "s1";
  a.caption_simple = "one two three";
  a.caption_detailed = "one two three four five";
  a.region.visible_instance_ids = {0, 1};
  a.qa = {qa("What is it?", "a chair", 4), qa("What  is it? ", "a", 4)};
  SituationRecord b;
  b.scene_id = "s2";
  b.caption_missing = true;
  b.region.visible_instance_ids = {0};
  const DatasetStats s = compute_stats({a, b});
  EXPECT_EQ(s.records, 2u);
  EXPECT_EQ(s.situation_texts, 2u);
  EXPECT_DOUBLE_EQ(s.avg_situation_length, 4.0);
  EXPECT_EQ(s.questions, 2u);
  EXPECT_EQ(s.unique_questions, 1u);  // whitespace-normalized
  EXPECT_DOUBLE_EQ(s.avg_question_length, 3.0);
  EXPECT_DOUBLE_EQ(s.avg_answer_length, 1.5);
  EXPECT_EQ(s.scenes, 2u);
  EXPECT_EQ(s.objects, 3u);
  EXPECT_THROW(compute_stats({}), std::invalid_argument);
}

TEST(Tokens, Whitespace) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("  a\tb\n c  "), 3u);
  EXPECT_EQ(normalize_whitespace("  a\tb\n c  "), "a b c");
}

TEST(BuildRecord, MockProvider) {
  const Scene s = make_scene({{"chair", {{3, 0, 1.4}, {3, 0, 1.6}}}}, "sc");
  MockCaptionProvider provider;
  BuildOptions opts;
  opts.qa_per_category = 3;
  const auto out = build_record(s, frame_at_origin(10.0), provider, opts);
  ASSERT_TRUE(out.record.has_value());
  const auto& r = *out.record;
  EXPECT_EQ(r.region.visible_instance_ids, std::vector<int>{0});
  EXPECT_EQ(r.caption_simple, "A chair is in view.");
  EXPECT_EQ(r.caption_detailed, "A chair is in view about 3.0 meters straight ahead.");
  EXPECT_EQ(r.qa.size(), 12u);
  EXPECT_FALSE(r.caption_missing);
  EXPECT_TRUE(r.situation.position.isApprox(Vec3(0, 0, 1.5)));
}

TEST(BuildRecord, ProviderFailureKeepsGeometry) {
  const Scene s = make_scene({{"chair", {{3, 0, 1.4}, {3, 0, 1.6}}}}, "sc");
  MockCaptionProvider ok, failing(true);
  const auto good = build_record(s, frame_at_origin(10.0), ok);
  const auto out = build_record(s, frame_at_origin(10.0), failing);
  ASSERT_TRUE(out.record.has_value());
  EXPECT_TRUE(out.record->caption_missing);
  EXPECT_FALSE(out.provider_error.empty());
  EXPECT_TRUE(out.record->caption_simple.empty());
  EXPECT_TRUE(out.record->qa.empty());
  EXPECT_EQ(out.record->region, good.record->region);
  EXPECT_EQ(out.record->situation.position, good.record->situation.position);
}

TEST(BuildRecord, EmptyRegionSkips) {
  const Scene s = make_scene({{"chair", {{-3, 0, 1.5}, {-3, 0, 1.6}}}}, "sc");
  MockCaptionProvider provider;
  const auto out = build_record(s, frame_at_origin(10.0), provider);
  EXPECT_FALSE(out.record.has_value());
  EXPECT_FALSE(out.skip_reason.empty());
}

TEST(HttpProvider, TalksToLocalServer) {
  httplib::Server server;
  server.Post("/api/caption", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply = {{"provider_id", "local"}};
    const std::string mode = body.at("mode");
    if (mode.rfind("qa:", 0) == 0) {
      reply["qa"] = nlohmann::json::array();
      for (int i = 0; i < body.at("count").get<int>(); ++i) {
        reply["qa"].push_back({{"question", "q" + std::to_string(i)},
                               {"answer", "a"},
                               {"category", mode.substr(3)},
                               {"rank_score", 4.0}});
      }
    } else {
      reply["texts"] = {mode + " " + body.at("objects")[0].at("label").get<std::string>()};
    }
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/api/verify", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"correctness":5,"hallucination":4,"general":3,"score":4})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/api";
  HttpCaptionProvider provider({url, 2000, 0});
  const Scene s = make_scene({{"chair", {{3, 0, 1.4}, {3, 0, 1.6}}}}, "sc");
  BuildOptions opts;
  opts.qa_per_category = 2;
  const auto out = build_record(s, frame_at_origin(10.0), provider, opts);
  ASSERT_TRUE(out.record.has_value());
  EXPECT_FALSE(out.record->caption_missing) << out.provider_error;
  EXPECT_EQ(out.record->caption_simple, "simple chair");
  EXPECT_EQ(out.record->qa.size(), 8u);

  HttpScorer scorer({url, 2000, 0});
  const auto v = verify_record(*out.record, scorer);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->correctness, 5.0);

  server.stop();
  t.join();

  // nothing listening now: captions go missing, geometry stays
  HttpCaptionProvider dead({url, 200, 0});
  const auto degraded = build_record(s, frame_at_origin(10.0), dead, opts);
  ASSERT_TRUE(degraded.record.has_value());
  EXPECT_TRUE(degraded.record->caption_missing);
}

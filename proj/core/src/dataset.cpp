#include "situ/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "situ/error.hpp"
#include "situ/scene_io.hpp"

namespace situ {

using json = nlohmann::json;

void validate_record(const SituationRecord& r) {
  if (std::abs(r.situation.rotation.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("record " + r.frame_id + ": rotation is not unit-norm");
  }
  for (const auto& q : r.qa) {
    if (!(q.rank_score >= 0.0 && q.rank_score <= 5.0)) {
      throw std::invalid_argument("record " + r.frame_id + ": rank_score outside [0, 5]");
    }
  }
  if (r.verification) {
    const auto& v = *r.verification;
    for (double s : {v.correctness, v.hallucination, v.general, v.score}) {
      if (!(s >= 0.0 && s <= 5.0)) {
        throw std::invalid_argument("record " + r.frame_id + ": verification score outside [0, 5]");
      }
    }
  }
}

json record_to_json(const SituationRecord& r) {
  json qa = json::array();
  for (const auto& q : r.qa) {
    qa.push_back(qa_to_json(q));
  }
  json j = {{"scene_id", r.scene_id},
            {"frame_id", r.frame_id},
            {"situation", situation_to_json(r.situation)},
            {"region",
             {{"point_indices", r.region.point_indices},
              {"visible_instance_ids", r.region.visible_instance_ids},
              {"depth_tol", r.region.depth_tol},
              {"min_visible_fraction", r.region.min_visible_fraction}}},
            {"caption_simple", r.caption_simple},
            {"caption_detailed", r.caption_detailed},
            {"qa", std::move(qa)},
            {"caption_missing", r.caption_missing}};
  if (r.action) {
    j["action"] = *r.action;
  }
  if (r.verification) {
    j["verification"] = verification_to_json(*r.verification);
  }
  for (const auto& [k, v] : r.extra.items()) {
    j[k] = v;
  }
  return j;
}

SituationRecord record_from_json(const json& j) {
  static const std::set<std::string> known = {
      "scene_id", "frame_id", "situation", "region", "caption_simple", "caption_detailed",
      "qa",       "caption_missing", "action", "verification"};
  if (!j.is_object()) {
    throw ParseError("record is not a JSON object");
  }
  SituationRecord r;
  try {
    r.scene_id = j.at("scene_id").get<std::string>();
    r.frame_id = j.at("frame_id").get<std::string>();
    r.situation = situation_from_json(j.at("situation"));
    const auto& reg = j.at("region");
    r.region.scene_id = r.scene_id;
    r.region.frame_id = r.frame_id;
    r.region.point_indices = reg.at("point_indices").get<std::vector<int>>();
    r.region.visible_instance_ids = reg.at("visible_instance_ids").get<std::vector<int>>();
    r.region.depth_tol = reg.at("depth_tol").get<double>();
    r.region.min_visible_fraction = reg.at("min_visible_fraction").get<double>();
    r.caption_simple = j.at("caption_simple").get<std::string>();
    r.caption_detailed = j.at("caption_detailed").get<std::string>();
    for (const auto& q : j.at("qa")) {
      r.qa.push_back(qa_from_json(q));
    }
    r.caption_missing = j.at("caption_missing").get<bool>();
    if (const auto it = j.find("action"); it != j.end()) {
      r.action = *it;
    }
    if (const auto it = j.find("verification"); it != j.end()) {
      r.verification = verification_from_json(*it);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) {
      r.extra[k] = v;
    }
  }
  return r;
}

void write_records(const std::filesystem::path& path, const std::vector<SituationRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write records " + path.string());
  }
  for (const auto& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

std::vector<SituationRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open records " + path.string());
  }
  std::vector<SituationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  }
  return out;
}

namespace {

std::vector<ViewObject> view_objects(const Scene& scene, const Situation& s,
                                     const std::vector<int>& ids) {
  double yaw = 0.0;
  try {
    yaw = yaw_from_quat(s.rotation);
  } catch (const DegenerateOrientation&) {
    // Looking straight up or down; bearings fall back to world x.
  }
  std::vector<ViewObject> out;
  for (int id : ids) {
    const Instance* inst = scene.find_instance(id);
    if (inst == nullptr) {
      continue;
    }
    const Vec3 rel = inst->center - s.position;
    ViewObject o;
    o.instance_id = id;
    o.label = inst->label;
    o.distance = std::hypot(rel.x(), rel.y());
    o.bearing = wrap_angle(std::atan2(rel.y(), rel.x()) - yaw);
    o.height = 2.0 * inst->bbox_extent.z();
    out.push_back(std::move(o));
  }
  std::sort(out.begin(), out.end(), [](const ViewObject& a, const ViewObject& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.instance_id < b.instance_id;
  });
  return out;
}

}  // namespace

BuildOutcome build_record(const Scene& scene, const CameraFrame& frame, CaptionProvider& provider,
                          const BuildOptions& opts) {
  BuildOutcome outcome;
  RegionCloud region = extract_region(frame, scene, opts.depth_tol, opts.min_visible_fraction);
  if (region.empty()) {
    outcome.skip_reason = "frame " + frame.frame_id + ": no scene points visible";
    return outcome;
  }
  SituationRecord r;
  r.scene_id = scene.scene_id;
  r.frame_id = frame.frame_id;
  r.situation = situation_from_frame(frame);
  r.region = std::move(region);

  CaptionRequest req;
  req.scene_id = r.scene_id;
  req.frame_id = r.frame_id;
  req.objects = view_objects(scene, r.situation, r.region.visible_instance_ids);
  try {
    req.mode = "simple";
    req.count = 1;
    r.caption_simple = provider.request(req).texts.at(0);
    req.mode = "detailed";
    r.caption_detailed = provider.request(req).texts.at(0);
    req.count = opts.qa_per_category;
    for (QaCategory c : kQaCategories) {
      req.mode = "qa:" + category_name(c);
      auto resp = provider.request(req);
      if (static_cast<int>(resp.qa.size()) != req.count) {
        throw ProviderError("provider returned the wrong number of QA items");
      }
      r.qa.insert(r.qa.end(), resp.qa.begin(), resp.qa.end());
    }
    validate_record(r);
  } catch (const std::exception& e) {
    r.caption_simple.clear();
    r.caption_detailed.clear();
    r.qa.clear();
    r.caption_missing = true;
    outcome.provider_error = e.what();
  }
  outcome.record = std::move(r);
  return outcome;
}

std::vector<QaItem> rank_filter_qa(const std::vector<QaItem>& qa, double threshold) {
  std::vector<QaItem> out;
  std::copy_if(qa.begin(), qa.end(), std::back_inserter(out),
               [&](const QaItem& q) { return q.rank_score >= threshold; });
  return out;
}

std::optional<Verification> verify_record(const SituationRecord& record, Scorer& scorer) {
  if (record.caption_missing || (record.caption_detailed.empty() && record.caption_simple.empty())) {
    throw std::invalid_argument("verify_record: record " + record.frame_id + " has no captions");
  }
  VerifyRequest req;
  req.scene_id = record.scene_id;
  req.frame_id = record.frame_id;
  req.caption = record.caption_detailed.empty() ? record.caption_simple : record.caption_detailed;
  try {
    Verification v = scorer.score(req);
    for (double s : {v.correctness, v.hallucination, v.general, v.score}) {
      if (!(s >= 0.0 && s <= 5.0)) {
        return std::nullopt;
      }
    }
    return v;
  } catch (const ProviderError&) {
    return std::nullopt;
  }
}

std::size_t count_tokens(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  std::string word;
  while (in >> word) {
    ++n;
  }
  return n;
}

std::string normalize_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::string out, word;
  while (in >> word) {
    if (!out.empty()) {
      out += ' ';
    }
    out += word;
  }
  return out;
}

DatasetStats compute_stats(const std::vector<SituationRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("compute_stats: no records");
  }
  DatasetStats s;
  s.records = records.size();
  std::set<std::string> scenes;
  std::set<std::pair<std::string, int>> objects;
  std::set<std::string> questions;
  std::size_t caption_tokens = 0, question_tokens = 0, answer_tokens = 0;
  for (const auto& r : records) {
    scenes.insert(r.scene_id);
    for (int id : r.region.visible_instance_ids) {
      objects.emplace(r.scene_id, id);
    }
    for (const std::string* c : {&r.caption_simple, &r.caption_detailed}) {
      if (!c->empty()) {
        ++s.situation_texts;
        caption_tokens += count_tokens(*c);
      }
    }
    for (const auto& q : r.qa) {
      ++s.questions;
      questions.insert(normalize_whitespace(q.question));
      question_tokens += count_tokens(q.question);
      answer_tokens += count_tokens(q.answer);
    }
  }
  s.scenes = scenes.size();
  s.objects = objects.size();
  s.unique_questions = questions.size();
  if (s.situation_texts > 0) {
    s.avg_situation_length = static_cast<double>(caption_tokens) / s.situation_texts;
  }
  if (s.questions > 0) {
    s.avg_question_length = static_cast<double>(question_tokens) / s.questions;
    s.avg_answer_length = static_cast<double>(answer_tokens) / s.questions;
  }
  return s;
}

json stats_to_json(const DatasetStats& s) {
  return {{"tokenization", "whitespace"},
          {"records", s.records},
          {"situation_texts", s.situation_texts},
          {"questions", s.questions},
          {"unique_questions", s.unique_questions},
          {"scenes", s.scenes},
          {"objects", s.objects},
          {"avg_situation_length", s.avg_situation_length},
          {"avg_question_length", s.avg_question_length},
          {"avg_answer_length", s.avg_answer_length}};
}

}  // namespace situ

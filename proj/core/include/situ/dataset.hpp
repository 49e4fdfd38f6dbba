#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "situ/geometry.hpp"
#include "situ/provider.hpp"
#include "situ/region.hpp"

namespace situ {

struct SituationRecord {
  std::string scene_id;
  std::string frame_id;
  Situation situation;
  RegionCloud region;
  std::string caption_simple;
  std::string caption_detailed;
  std::vector<QaItem> qa;
  bool caption_missing = false;
  std::optional<nlohmann::json> action;
  std::optional<Verification> verification;
  nlohmann::json extra = nlohmann::json::object();  // unknown top-level fields

  friend bool operator==(const SituationRecord&, const SituationRecord&) = default;
};

// Throws std::invalid_argument on a non-unit rotation or a score outside [0, 5].
void validate_record(const SituationRecord& r);

nlohmann::json record_to_json(const SituationRecord& r);
SituationRecord record_from_json(const nlohmann::json& j);

// JSON-lines, one record per line.
void write_records(const std::filesystem::path& path, const std::vector<SituationRecord>& records);
// Throws ParseError with the 1-based line number of a malformed line.
std::vector<SituationRecord> load_records(const std::filesystem::path& path);

struct BuildOptions {
  int qa_per_category = 10;
  double depth_tol = kDefaultDepthTolerance;
  double min_visible_fraction = kDefaultMinVisibleFraction;
};

struct BuildOutcome {
  std::optional<SituationRecord> record;  // empty when skipped
  std::string skip_reason;
  std::string provider_error;             // set when captions are missing
};

// Geometry from the frame, captions and QA from the provider. A provider
// failure leaves a geometry-only record flagged caption_missing; an empty
// region skips the frame.
BuildOutcome build_record(const Scene& scene, const CameraFrame& frame, CaptionProvider& provider,
                          const BuildOptions& opts = {});

// Stable subset with rank_score >= threshold.
std::vector<QaItem> rank_filter_qa(const std::vector<QaItem>& qa, double threshold = 3.0);

// Scores the detailed caption (simple when detailed is empty). nullopt when
// the scorer fails. Throws std::invalid_argument on a record without captions.
std::optional<Verification> verify_record(const SituationRecord& record, Scorer& scorer);

struct DatasetStats {
  std::size_t records = 0;
  std::size_t situation_texts = 0;  // non-empty captions
  std::size_t questions = 0;
  std::size_t unique_questions = 0;
  std::size_t scenes = 0;
  std::size_t objects = 0;          // distinct (scene, instance) in regions
  double avg_situation_length = 0;  // whitespace tokens
  double avg_question_length = 0;
  double avg_answer_length = 0;
  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

std::size_t count_tokens(const std::string& text);
// Trim and collapse whitespace runs to one space.
std::string normalize_whitespace(const std::string& text);

// Throws std::invalid_argument on an empty record set.
DatasetStats compute_stats(const std::vector<SituationRecord>& records);
nlohmann::json stats_to_json(const DatasetStats& s);

}  // namespace situ

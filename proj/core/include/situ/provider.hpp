#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "situ/error.hpp"

namespace situ {

enum class QaCategory { kObjectIdentification, kSpatialRelationship, kVisualFeature, kRoomLayout };

inline constexpr QaCategory kQaCategories[] = {
    QaCategory::kObjectIdentification, QaCategory::kSpatialRelationship,
    QaCategory::kVisualFeature, QaCategory::kRoomLayout};

std::string category_name(QaCategory c);
// Throws ParseError on anything but the four names.
QaCategory category_from_name(const std::string& name);

struct QaItem {
  std::string question;
  std::string answer;
  QaCategory category = QaCategory::kObjectIdentification;
  double rank_score = 0.0;  // 0-5
  friend bool operator==(const QaItem&, const QaItem&) = default;
};

nlohmann::json qa_to_json(const QaItem& q);
QaItem qa_from_json(const nlohmann::json& j);

// What the observer sees, in the observer's own frame.
struct ViewObject {
  int instance_id = 0;
  std::string label;
  double distance = 0;  // x-y meters
  double bearing = 0;   // radians, 0 ahead, counterclockwise (left) positive
  double height = 0;    // meters
};

struct CaptionRequest {
  std::string scene_id;
  std::string frame_id;
  std::string mode;  // "simple", "detailed" or "qa:<category>"
  int count = 1;
  std::vector<ViewObject> objects;
};

struct CaptionResponse {
  std::vector<std::string> texts;
  std::vector<QaItem> qa;
  std::string provider_id;
  double latency_ms = 0;
};

nlohmann::json caption_request_to_json(const CaptionRequest& r);
// Throws ProviderError on a malformed body or a qa list of the wrong length.
CaptionResponse caption_response_from_json(const nlohmann::json& j, const CaptionRequest& r);

class ProviderError : public Error {
 public:
  using Error::Error;
};

class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  // Thread-safe. Throws ProviderError on failure.
  virtual CaptionResponse request(const CaptionRequest& req) = 0;
};

// Templates captions and QA from the visible labels. Pure function of the
// request. With `fail` set every request throws, for exercising error paths.
class MockCaptionProvider : public CaptionProvider {
 public:
  explicit MockCaptionProvider(bool fail = false) : fail_(fail) {}
  CaptionResponse request(const CaptionRequest& req) override;

 private:
  bool fail_;
};

struct HttpClientConfig {
  std::string url;  // scheme://host[:port]
  int timeout_ms = 5000;
  int retries = 2;
};

// POST <url>/caption with the request JSON.
class HttpCaptionProvider : public CaptionProvider {
 public:
  explicit HttpCaptionProvider(HttpClientConfig cfg);
  CaptionResponse request(const CaptionRequest& req) override;

 private:
  HttpClientConfig cfg_;
};

struct Verification {
  double correctness = 0;
  double hallucination = 0;
  double general = 0;
  double score = 0;  // 0-5
  std::optional<std::string> refined_caption;
  friend bool operator==(const Verification&, const Verification&) = default;
};

nlohmann::json verification_to_json(const Verification& v);
// Throws ParseError when a score is missing or outside [0, 5].
Verification verification_from_json(const nlohmann::json& j);

struct VerifyRequest {
  std::string scene_id;
  std::string frame_id;
  std::string caption;
  std::vector<std::string> labels;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  // Throws ProviderError when unreachable or the reply is invalid.
  virtual Verification score(const VerifyRequest& req) = 0;
};

// Fixed sub-scores; `refine_suffix`, when set, yields caption + suffix as the
// refined caption.
class MockScorer : public Scorer {
 public:
  explicit MockScorer(double score = 4.0, std::optional<std::string> refine_suffix = std::nullopt)
      : score_(score), refine_suffix_(std::move(refine_suffix)) {}
  Verification score(const VerifyRequest& req) override;

 private:
  double score_;
  std::optional<std::string> refine_suffix_;
};

// POST <url>/verify with {scene_id, frame_id, caption, labels}.
class HttpScorer : public Scorer {
 public:
  explicit HttpScorer(HttpClientConfig cfg);
  Verification score(const VerifyRequest& req) override;

 private:
  HttpClientConfig cfg_;
};

}  // namespace situ

#include "situ/provider.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <httplib.h>
#include <thread>

namespace situ {

std::string category_name(QaCategory c) {
  switch (c) {
    case QaCategory::kObjectIdentification: return "object_identification";
    case QaCategory::kSpatialRelationship: return "spatial_relationship";
    case QaCategory::kVisualFeature: return "visual_feature";
    case QaCategory::kRoomLayout: return "room_layout";
  }
  return "";
}

QaCategory category_from_name(const std::string& name) {
  for (QaCategory c : kQaCategories) {
    if (category_name(c) == name) {
      return c;
    }
  }
  throw ParseError("unknown QA category '" + name + "'");
}

nlohmann::json qa_to_json(const QaItem& q) {
  return {{"question", q.question},
          {"answer", q.answer},
          {"category", category_name(q.category)},
          {"rank_score", q.rank_score}};
}

QaItem qa_from_json(const nlohmann::json& j) {
  QaItem q;
  try {
    q.question = j.at("question").get<std::string>();
    q.answer = j.at("answer").get<std::string>();
    q.category = category_from_name(j.at("category").get<std::string>());
    q.rank_score = j.at("rank_score").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("QA item: ") + e.what());
  }
  return q;
}

nlohmann::json caption_request_to_json(const CaptionRequest& r) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : r.objects) {
    objects.push_back({{"id", o.instance_id},
                       {"label", o.label},
                       {"distance", o.distance},
                       {"bearing", o.bearing},
                       {"height", o.height}});
  }
  return {{"frame", {{"scene_id", r.scene_id}, {"frame_id", r.frame_id}}},
          {"mode", r.mode},
          {"count", r.count},
          {"objects", std::move(objects)}};
}

CaptionResponse caption_response_from_json(const nlohmann::json& j, const CaptionRequest& r) {
  CaptionResponse out;
  try {
    if (!j.is_object()) {
      throw ProviderError("provider reply is not a JSON object");
    }
    out.provider_id = j.value("provider_id", std::string());
    out.latency_ms = j.value("latency_ms", 0.0);
    if (r.mode.rfind("qa:", 0) == 0) {
      const auto& qa = j.at("qa");
      if (!qa.is_array() || static_cast<int>(qa.size()) != r.count) {
        throw ProviderError("provider returned " + std::to_string(qa.size()) + " QA items, expected " +
                            std::to_string(r.count));
      }
      for (const auto& item : qa) {
        out.qa.push_back(qa_from_json(item));
      }
    } else {
      const auto& texts = j.at("texts");
      if (!texts.is_array() || texts.empty()) {
        throw ProviderError("provider returned no texts");
      }
      for (const auto& t : texts) {
        out.texts.push_back(t.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed provider reply: ") + e.what());
  } catch (const ParseError& e) {
    throw ProviderError(std::string("malformed provider reply: ") + e.what());
  }
  return out;
}

namespace {

std::string fmt1(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

std::string side(double bearing) {
  if (std::abs(bearing) < 0.15) {
    return "straight ahead";
  }
  return bearing > 0 ? "ahead to the left" : "ahead to the right";
}

double mock_rank(const std::string& q, const std::string& a) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : q + "|" + a) {
    h = (h ^ ch) * 1099511628211ULL;
  }
  return static_cast<double>(h % 11) * 0.5;
}

QaItem mock_qa(QaCategory cat, int i, const std::vector<ViewObject>& objects) {
  QaItem q;
  q.category = cat;
  if (objects.empty()) {
    switch (cat) {
      case QaCategory::kObjectIdentification:
        q.question = "What is in front of me?";
        q.answer = "nothing notable";
        break;
      case QaCategory::kSpatialRelationship:
        q.question = "Is anything to my left?";
        q.answer = "no";
        break;
      case QaCategory::kVisualFeature:
        q.question = "Is anything tall in view?";
        q.answer = "no";
        break;
      case QaCategory::kRoomLayout:
        q.question = "How many objects are in view?";
        q.answer = "0";
        break;
    }
  } else {
    const std::size_t k = static_cast<std::size_t>(i) % objects.size();
    const ViewObject& o = objects[k];
    switch (cat) {
      case QaCategory::kObjectIdentification:
        q.question = "What is the number " + std::to_string(k + 1) + " closest object in view?";
        q.answer = o.label;
        break;
      case QaCategory::kSpatialRelationship:
        q.question = "Is the " + o.label + " to my left or to my right?";
        q.answer = side(o.bearing);
        break;
      case QaCategory::kVisualFeature:
        q.question = "How tall is the " + o.label + "?";
        q.answer = "about " + fmt1(o.height) + " meters";
        break;
      case QaCategory::kRoomLayout:
        q.question = "How far away is the " + o.label + "?";
        q.answer = "about " + fmt1(o.distance) + " meters";
        break;
    }
  }
  q.rank_score = mock_rank(q.question, q.answer);
  return q;
}

}  // namespace

CaptionResponse MockCaptionProvider::request(const CaptionRequest& req) {
  if (fail_) {
    throw ProviderError("mock provider configured to fail");
  }
  CaptionResponse out;
  out.provider_id = "mock";
  const auto& objs = req.objects;
  if (req.mode == "simple") {
    if (objs.empty()) {
      out.texts.push_back("Nothing notable is in view.");
    } else if (objs.size() == 1) {
      out.texts.push_back("A " + objs[0].label + " is in view.");
    } else {
      out.texts.push_back("A " + objs[0].label + " is in view, along with " +
                          std::to_string(objs.size() - 1) + " other objects.");
    }
  } else if (req.mode == "detailed") {
    std::string text;
    for (const auto& o : objs) {
      text += (text.empty() ? "" : " ") + std::string("A ") + o.label + " is in view about " +
              fmt1(o.distance) + " meters " + side(o.bearing) + ".";
    }
    out.texts.push_back(objs.empty() ? "Nothing notable is in view." : text);
  } else if (req.mode.rfind("qa:", 0) == 0) {
    QaCategory cat;
    try {
      cat = category_from_name(req.mode.substr(3));
    } catch (const ParseError& e) {
      throw ProviderError(e.what());
    }
    for (int i = 0; i < req.count; ++i) {
      out.qa.push_back(mock_qa(cat, i, objs));
    }
  } else {
    throw ProviderError("unknown request mode '" + req.mode + "'");
  }
  return out;
}

namespace {

// Splits "http://host:port/prefix" into the client origin and path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', start);
  if (slash == std::string::npos) {
    return {url, ""};
  }
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  return {url.substr(0, slash), prefix};
}

nlohmann::json post_json(const HttpClientConfig& cfg, const std::string& endpoint,
                         const nlohmann::json& body) {
  const auto [origin, prefix] = split_url(cfg.url);
  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw ProviderError("invalid provider URL '" + cfg.url + "'");
  }
  const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    auto res = client.Post(prefix + endpoint, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      if (res->status < 500) {
        break;
      }
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("provider reply is not JSON: ") + e.what());
    }
  }
  throw ProviderError("POST " + cfg.url + endpoint + " failed: " + last_error);
}

}  // namespace

HttpCaptionProvider::HttpCaptionProvider(HttpClientConfig cfg) : cfg_(std::move(cfg)) {}

CaptionResponse HttpCaptionProvider::request(const CaptionRequest& req) {
  const auto t0 = std::chrono::steady_clock::now();
  CaptionResponse out = caption_response_from_json(post_json(cfg_, "/caption", caption_request_to_json(req)), req);
  if (out.latency_ms == 0) {
    out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

nlohmann::json verification_to_json(const Verification& v) {
  nlohmann::json j = {{"correctness", v.correctness},
                      {"hallucination", v.hallucination},
                      {"general", v.general},
                      {"score", v.score}};
  if (v.refined_caption) {
    j["refined_caption"] = *v.refined_caption;
  }
  return j;
}

Verification verification_from_json(const nlohmann::json& j) {
  Verification v;
  auto score = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
      throw ParseError(std::string("verification field '") + key + "' missing or not a number");
    }
    const double x = it->get<double>();
    if (!(x >= 0.0 && x <= 5.0)) {
      throw ParseError(std::string("verification field '") + key + "' outside [0, 5]");
    }
    return x;
  };
  if (!j.is_object()) {
    throw ParseError("verification block is not an object");
  }
  v.correctness = score("correctness");
  v.hallucination = score("hallucination");
  v.general = score("general");
  v.score = score("score");
  if (const auto it = j.find("refined_caption"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw ParseError("verification field 'refined_caption' is not a string");
    }
    v.refined_caption = it->get<std::string>();
  }
  return v;
}

Verification MockScorer::score(const VerifyRequest& req) {
  Verification v{score_, score_, score_, score_, std::nullopt};
  if (refine_suffix_) {
    v.refined_caption = req.caption + *refine_suffix_;
  }
  return v;
}

HttpScorer::HttpScorer(HttpClientConfig cfg) : cfg_(std::move(cfg)) {}

Verification HttpScorer::score(const VerifyRequest& req) {
  const nlohmann::json body = {{"scene_id", req.scene_id},
                               {"frame_id", req.frame_id},
                               {"caption", req.caption},
                               {"labels", req.labels}};
  try {
    return verification_from_json(post_json(cfg_, "/verify", body));
  } catch (const ParseError& e) {
    throw ProviderError(std::string("invalid scorer reply: ") + e.what());
  }
}

}  // namespace situ

#include "docmt/scoring.hpp"

#include <cmath>

#include <httplib.h>

#include "docmt/error.hpp"
#include "docmt/evaluation.hpp"
#include "http_util.hpp"

namespace docmt {

std::vector<double> ScorerClient::score_batch(std::span<const ScoreItem> items) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(score(item));
  return out;
}

double CharFUtility::score(std::string_view hyp, std::string_view ref, const Context&) {
  return char_bigram_fscore(hyp, ref);
}

double ScorerUtility::score(std::string_view hyp, std::string_view ref, const Context& context) {
  ScoreItem item;
  item.mt = std::string(hyp);
  item.ref = std::string(ref);
  if (use_context_) item.context = context;
  return client_.score(item);
}

double ScorerChunkScorer::score(const SlideWindow& window) {
  ScoreItem item;
  item.src = window.src;
  item.mt = window.hyp;
  item.ref = window.ref;
  return client_.score(item);
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::ref_based:
      return "ref_based";
    case MetricKind::qe:
      return "qe";
    case MetricKind::context_ref_based:
      return "context_ref_based";
  }
  return "qe";
}

MetricKind metric_kind_from_string(std::string_view s) {
  if (s == "ref_based") return MetricKind::ref_based;
  if (s == "qe") return MetricKind::qe;
  if (s == "context_ref_based") return MetricKind::context_ref_based;
  throw ValidationError("unknown metric '" + std::string(s) + "'");
}

nlohmann::json build_score_request(MetricKind metric, std::span<const ScoreItem> items) {
  if (items.empty()) throw ValidationError("score request needs at least one item");
  nlohmann::json body;
  body["metric"] = to_string(metric);
  body["items"] = nlohmann::json::array();
  for (const auto& item : items) {
    const bool needs_ref = metric != MetricKind::qe;
    if (needs_ref && !item.ref) throw ValidationError("metric " + to_string(metric) + " requires a reference");
    if (!needs_ref && item.ref) throw ValidationError("qe requests carry no reference");
    nlohmann::json j;
    j["src"] = item.src;
    j["mt"] = item.mt;
    if (item.ref) j["ref"] = *item.ref;
    if (!item.context.empty()) {
      j["context"] = nlohmann::json::array();
      for (const auto& p : item.context) j["context"].push_back({{"src", p.src}, {"tgt", p.tgt}});
    }
    body["items"].push_back(std::move(j));
  }
  return body;
}

ScoreResponse parse_score_response(const nlohmann::json& body, std::size_t expected) {
  ScoreResponse out;
  try {
    out.scores = body.at("scores").get<std::vector<double>>();
    out.model_id = body.value("model_id", "");
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("malformed score response: ") + e.what());
  }
  if (out.scores.size() != expected)
    throw ScorerError("score response has " + std::to_string(out.scores.size()) + " scores for " +
                      std::to_string(expected) + " items");
  for (double s : out.scores) {
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) throw ScorerError("score outside [0, 1]");
  }
  return out;
}

HttpScorerClient::HttpScorerClient(ScoringServiceConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.batch_size == 0) throw ValidationError("scorer batch size must be >= 1");
}

double HttpScorerClient::score(const ScoreItem& item) {
  return score_batch(std::span<const ScoreItem>(&item, 1)).front();
}

std::vector<double> HttpScorerClient::score_batch(std::span<const ScoreItem> items) {
  auto [host, prefix] = detail::split_base_url(cfg_.base_url);
  httplib::Client client(host);
  const auto ms = cfg_.timeout.count();
  client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
  std::vector<double> out;
  out.reserve(items.size());
  for (std::size_t b = 0; b < items.size(); b += cfg_.batch_size) {
    auto batch = items.subspan(b, std::min(cfg_.batch_size, items.size() - b));
    const std::string body = build_score_request(cfg_.metric, batch).dump();
    auto res = client.Post(prefix + "/v1/score", body, "application/json");
    if (!res) throw ScorerError("scoring service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw ScorerError("scoring service returned HTTP " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 200));
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(std::string("malformed score response: ") + e.what());
    }
    auto resp = parse_score_response(parsed, batch.size());
    model_id_ = resp.model_id;
    out.insert(out.end(), resp.scores.begin(), resp.scores.end());
  }
  return out;
}

bool HttpScorerClient::healthy() {
  try {
    auto [host, prefix] = detail::split_base_url(cfg_.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Get(prefix + "/health");
    if (!res || res->status != 200) return false;
    auto j = nlohmann::json::parse(res->body);
    return j.value("ok", false);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace docmt

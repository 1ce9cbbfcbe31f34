#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/context.hpp"

// Contracts for every learned scorer the toolkit consumes: segment QE and
// fluency scoring during curation, utilities for MBR selection, window
// scorers for SLIDE, and language identification. Concrete neural models live
// behind the scoring service; HttpScorerClient speaks its wire protocol.
namespace docmt {

struct ScoreItem {
  std::string src;
  std::string mt;
  std::optional<std::string> ref;
  Context context;
};

// Scores in [0,1], deterministic for identical inputs within one run.
class ScorerClient {
 public:
  virtual ~ScorerClient() = default;
  virtual double score(const ScoreItem& item) = 0;
  // Same order as `items`. The default issues one call per item.
  virtual std::vector<double> score_batch(std::span<const ScoreItem> items);
};

class FunctionScorer final : public ScorerClient {
 public:
  explicit FunctionScorer(std::function<double(const ScoreItem&)> fn) : fn_(std::move(fn)) {}
  double score(const ScoreItem& item) override { return fn_(item); }

 private:
  std::function<double(const ScoreItem&)> fn_;
};

struct LangGuess {
  std::string code;
  double confidence = 0.0;
};

class LanguageIdentifier {
 public:
  virtual ~LanguageIdentifier() = default;
  virtual LangGuess identify(std::string_view text) = 0;
};

class FunctionLanguageIdentifier final : public LanguageIdentifier {
 public:
  explicit FunctionLanguageIdentifier(std::function<LangGuess(std::string_view)> fn) : fn_(std::move(fn)) {}
  LangGuess identify(std::string_view text) override { return fn_(text); }

 private:
  std::function<LangGuess(std::string_view)> fn_;
};

// Reference-based utility M(hyp, ref) used by MBR. When use_context() is
// true the preceding committed pairs are passed along.
class UtilityMetric {
 public:
  virtual ~UtilityMetric() = default;
  virtual double score(std::string_view hyp, std::string_view ref, const Context& context) = 0;
  virtual bool use_context() const { return false; }
};

class FunctionUtility final : public UtilityMetric {
 public:
  using Fn = std::function<double(std::string_view, std::string_view, const Context&)>;
  explicit FunctionUtility(Fn fn, bool use_context = false) : fn_(std::move(fn)), use_context_(use_context) {}
  double score(std::string_view hyp, std::string_view ref, const Context& context) override {
    return fn_(hyp, ref, context);
  }
  bool use_context() const override { return use_context_; }

 private:
  Fn fn_;
  bool use_context_;
};

// Character-bigram F-score; needs no model.
class CharFUtility final : public UtilityMetric {
 public:
  double score(std::string_view hyp, std::string_view ref, const Context& context) override;
};

struct SlideWindow {
  std::string src;
  std::string hyp;
  std::string ref;
  std::size_t tokens = 0;
};

class ChunkScorer {
 public:
  virtual ~ChunkScorer() = default;
  virtual double score(const SlideWindow& window) = 0;
};

class FunctionChunkScorer final : public ChunkScorer {
 public:
  explicit FunctionChunkScorer(std::function<double(const SlideWindow&)> fn) : fn_(std::move(fn)) {}
  double score(const SlideWindow& window) override { return fn_(window); }

 private:
  std::function<double(const SlideWindow&)> fn_;
};

// Adapters routing the other contracts through a ScorerClient.
class ScorerUtility final : public UtilityMetric {
 public:
  ScorerUtility(ScorerClient& client, bool use_context) : client_(client), use_context_(use_context) {}
  double score(std::string_view hyp, std::string_view ref, const Context& context) override;
  bool use_context() const override { return use_context_; }

 private:
  ScorerClient& client_;
  bool use_context_;
};

class ScorerChunkScorer final : public ChunkScorer {
 public:
  explicit ScorerChunkScorer(ScorerClient& client) : client_(client) {}
  double score(const SlideWindow& window) override;

 private:
  ScorerClient& client_;
};

// ---- Scoring-service wire protocol ----------------------------------------

enum class MetricKind { ref_based, qe, context_ref_based };

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(std::string_view s);

// POST /v1/score body. Throws ValidationError when the items do not fit the
// metric (ref required iff metric != qe; items nonempty).
nlohmann::json build_score_request(MetricKind metric, std::span<const ScoreItem> items);

struct ScoreResponse {
  std::vector<double> scores;
  std::string model_id;
};

// Throws ScorerError on length mismatch or non-finite / out-of-range scores.
ScoreResponse parse_score_response(const nlohmann::json& body, std::size_t expected);

struct ScoringServiceConfig {
  std::string base_url = "http://127.0.0.1:8090";
  MetricKind metric = MetricKind::qe;
  std::chrono::milliseconds timeout{30000};
  std::size_t batch_size = 64;
};

class HttpScorerClient final : public ScorerClient {
 public:
  explicit HttpScorerClient(ScoringServiceConfig cfg);
  double score(const ScoreItem& item) override;
  std::vector<double> score_batch(std::span<const ScoreItem> items) override;

  // GET /health; false when unreachable or not ok.
  bool healthy();
  const std::string& model_id() const { return model_id_; }

 private:
  ScoringServiceConfig cfg_;
  std::string model_id_;
};

}  // namespace docmt

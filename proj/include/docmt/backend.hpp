#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/error.hpp"
#include "docmt/prompt.hpp"
#include "docmt/tokens.hpp"

namespace docmt {

enum class DecodeMode { greedy, nucleus };

struct DecodeParams {
  DecodeMode mode = DecodeMode::greedy;
  double top_p = 0.6;
  std::size_t n_candidates = 1;
  std::size_t max_new_tokens = 0;  // 0: twice the source token estimate
  double temperature = 0.0;

  static DecodeParams greedy();
  // Quality-aware chunking defaults: 32 candidates, top_p 0.6.
  static DecodeParams nucleus(double top_p = 0.6, std::size_t n = 32, double temperature = 1.0);
  void validate() const;
};

struct Completion {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double latency = 0.0;  // seconds
  std::size_t retries = 0;
};

struct BackendConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "default";
  std::string api_key_env = "DOCMT_API_KEY";
  double timeout_seconds = 120.0;
  std::size_t max_retries = 3;
  std::size_t max_concurrency = 4;
  std::chrono::milliseconds retry_base_delay{500};
  // Endpoint honors n > 1 in a single request.
  bool native_n = true;
  // Optional request log: one line per attempt.
  std::optional<std::filesystem::path> request_log;

  void validate() const;
};

// Delay before retry i (0-based): base * 2^i.
std::vector<std::chrono::milliseconds> retry_schedule(std::size_t max_retries, std::chrono::milliseconds base);

// ---- Transport layer ---------------------------------------------------------

struct ChatRequest {
  std::string correlation_id;
  std::string user_content;
  DecodeParams params;       // n_candidates is what this single request asks for
  std::size_t sample_index = 0;  // position of the first requested sample
  std::size_t max_tokens = 0;
};

struct ChatResponse {
  std::vector<std::string> choices;
  std::optional<std::size_t> prompt_tokens;
  std::optional<std::size_t> completion_tokens;
  std::optional<double> latency;  // reported by simulated transports
};

// Retryable: 5xx, 408, 429, connection failures.
class TransientBackendError : public BackendError {
 public:
  using BackendError::BackendError;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

// OpenAI-compatible chat-completions body. Greedy requests carry only
// temperature 0; nucleus requests carry temperature, top_p and n.
nlohmann::json build_chat_request_body(const ChatRequest& request, const std::string& model);
ChatResponse parse_chat_response(const nlohmann::json& body);

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(BackendConfig cfg);
  ChatResponse send(const ChatRequest& request) override;

 private:
  BackendConfig cfg_;
  std::string host_;
  std::string path_;
  std::string api_key_;
};

// ---- Client --------------------------------------------------------------------

// Counting semaphore usable with a runtime bound.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t limit) : available_(limit) {}
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
};

// Shareable across threads. Enforces max_concurrency over every attempt,
// retries transient failures on the fixed exponential schedule, splits n > 1
// into independent requests when the endpoint lacks native n, and returns
// candidates ordered by sample index.
class BackendClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  BackendClient(std::shared_ptr<Transport> transport, BackendConfig cfg,
                const TokenCounter& counter = default_token_counter());

  std::vector<Completion> complete(const Prompt& prompt, const DecodeParams& params);
  std::vector<Completion> complete_content(const std::string& user_content, const DecodeParams& params);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  const BackendConfig& config() const { return cfg_; }
  const TokenCounter& counter() const { return counter_; }
  std::size_t total_attempts() const { return attempts_.load(); }
  std::size_t total_retries() const { return retries_.load(); }

 private:
  struct Sent {
    ChatResponse response;
    double latency;
    std::size_t retries;
  };
  Sent send_with_retries(const ChatRequest& request);
  void log_attempt(const ChatRequest& request, std::size_t attempt, const std::string& status, double latency);
  std::vector<Completion> to_completions(const ChatRequest& request, const Sent& sent, std::size_t want);

  std::shared_ptr<Transport> transport_;
  BackendConfig cfg_;
  const TokenCounter& counter_;
  ConcurrencyLimiter limiter_;
  Sleeper sleeper_;
  std::atomic<std::size_t> attempts_{0};
  std::atomic<std::size_t> retries_{0};
  std::mutex log_mu_;
  std::unique_ptr<std::ofstream> log_;
};

// ---- Mock transport ----------------------------------------------------------------

enum class MockBehavior { identity, reverse_words, table, scripted, noisy };

std::string to_string(MockBehavior b);
MockBehavior mock_behavior_from_string(std::string_view s);

struct MockReply {
  int status = 200;
  std::string text;  // the payload; the mock appends the template period
};

// Deterministic stand-in for a chat endpoint. Extracts the source payload from
// the rendered user turn, transforms it per behavior and answers in template
// form "{output}.". Records every request and the peak number of requests in
// flight.
class MockTransport final : public Transport {
 public:
  using Script = std::function<MockReply(const ChatRequest& request, std::size_t call_index, std::size_t choice)>;

  struct Options {
    MockBehavior behavior = MockBehavior::identity;
    std::map<std::string, std::string> table;
    Script script;
    uint64_t seed = 0;
    std::chrono::microseconds latency{0};
    // Added per word of the longest choice, modelling decode time.
    std::chrono::microseconds latency_per_word{0};
    bool sleep = true;       // really wait `latency` (false: only report it)
    bool native_n = true;    // answer n choices in one response
    bool report_usage = false;
  };

  explicit MockTransport(Options options);
  static std::shared_ptr<MockTransport> make(MockBehavior behavior);

  ChatResponse send(const ChatRequest& request) override;

  std::vector<ChatRequest> requests() const;
  std::size_t calls() const { return calls_.load(); }
  std::size_t max_in_flight() const { return max_in_flight_.load(); }

  // Payload transformations, exposed for tests.
  static std::string reverse_words(std::string_view s);
  static std::string perturb(std::string_view s, uint64_t key);

 private:
  std::string respond(const ChatRequest& request, std::size_t call_index, std::size_t choice, int& status);

  Options opts_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> log_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

// Template post-processing of a raw completion: drops a trailing end-of-turn
// marker and exactly one trailing template period.
std::string strip_template(std::string_view completion);

}  // namespace docmt

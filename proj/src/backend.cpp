#include "docmt/backend.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

#include <httplib.h>

#include "docmt/hash.hpp"
#include "docmt/random.hpp"
#include "docmt/text.hpp"
#include "http_util.hpp"

namespace docmt {

DecodeParams DecodeParams::greedy() { return DecodeParams{}; }

DecodeParams DecodeParams::nucleus(double top_p, std::size_t n, double temperature) {
  DecodeParams p;
  p.mode = DecodeMode::nucleus;
  p.top_p = top_p;
  p.n_candidates = n;
  p.temperature = temperature;
  return p;
}

void DecodeParams::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ValidationError("temperature must be >= 0");
  if (mode == DecodeMode::greedy) {
    if (n_candidates != 1) throw ValidationError("greedy decoding produces exactly one candidate");
  } else {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("top_p must lie in (0, 1]");
    if (n_candidates < 1) throw ValidationError("n_candidates must be >= 1");
  }
}

void BackendConfig::validate() const {
  if (max_concurrency < 1) throw ValidationError("max_concurrency must be >= 1");
  if (!(timeout_seconds > 0.0)) throw ValidationError("timeout must be positive");
}

std::vector<std::chrono::milliseconds> retry_schedule(std::size_t max_retries, std::chrono::milliseconds base) {
  std::vector<std::chrono::milliseconds> out;
  out.reserve(max_retries);
  for (std::size_t i = 0; i < max_retries; ++i) out.push_back(base * (int64_t{1} << std::min<std::size_t>(i, 30)));
  return out;
}

namespace {

[[noreturn]] void throw_for_status(int status, const std::string& detail) {
  const std::string msg = "HTTP " + std::to_string(status) + (detail.empty() ? "" : ": " + detail);
  if (status == 401 || status == 403) throw AuthError(msg);
  if (status == 408 || status == 429 || status >= 500) throw TransientBackendError(msg);
  throw BackendError(msg);
}

}  // namespace

nlohmann::json build_chat_request_body(const ChatRequest& request, const std::string& model) {
  nlohmann::json body;
  body["model"] = model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.user_content}}});
  body["max_tokens"] = request.max_tokens;
  if (request.params.mode == DecodeMode::greedy) {
    body["temperature"] = 0.0;
  } else {
    body["temperature"] = request.params.temperature;
    body["top_p"] = request.params.top_p;
    body["n"] = request.params.n_candidates;
  }
  return body;
}

ChatResponse parse_chat_response(const nlohmann::json& body) {
  ChatResponse out;
  try {
    const auto& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) throw BackendError("malformed response: no choices");
    for (const auto& c : choices) {
      if (c.contains("message")) {
        out.choices.push_back(c.at("message").at("content").get<std::string>());
      } else {
        out.choices.push_back(c.at("text").get<std::string>());
      }
    }
    if (auto it = body.find("usage"); it != body.end() && it->is_object()) {
      if (it->contains("prompt_tokens")) out.prompt_tokens = it->at("prompt_tokens").get<std::size_t>();
      if (it->contains("completion_tokens")) out.completion_tokens = it->at("completion_tokens").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response: ") + e.what());
  }
  return out;
}

HttpTransport::HttpTransport(BackendConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  auto [host, prefix] = detail::split_base_url(cfg_.base_url);
  host_ = std::move(host);
  path_ = prefix + "/chat/completions";
  if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
}

ChatResponse HttpTransport::send(const ChatRequest& request) {
  httplib::Client client(host_);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers = {{"X-Correlation-Id", request.correlation_id}};
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const std::string body = build_chat_request_body(request, cfg_.model).dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) throw TransientBackendError("connection failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw_for_status(res->status, res->body.substr(0, 200));
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response: ") + e.what());
  }
  return parse_chat_response(parsed);
}

// ---- Client ---------------------------------------------------------------------

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(ConcurrencyLimiter& l) : l_(l) { l_.acquire(); }
  ~SlotGuard() { l_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  ConcurrencyLimiter& l_;
};

}  // namespace

BackendClient::BackendClient(std::shared_ptr<Transport> transport, BackendConfig cfg, const TokenCounter& counter)
    : transport_(std::move(transport)),
      cfg_(std::move(cfg)),
      counter_(counter),
      limiter_((cfg_.validate(), cfg_.max_concurrency)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (!transport_) throw ValidationError("backend client needs a transport");
  if (cfg_.request_log) {
    log_ = std::make_unique<std::ofstream>(*cfg_.request_log, std::ios::app);
    if (!*log_) throw IoError("cannot open request log " + cfg_.request_log->string());
  }
}

void BackendClient::log_attempt(const ChatRequest& request, std::size_t attempt, const std::string& status,
                                double latency) {
  if (!log_) return;
  nlohmann::ordered_json j;
  j["correlation_id"] = request.correlation_id;
  j["attempt"] = attempt;
  j["status"] = status;
  j["latency"] = latency;
  std::lock_guard lock(log_mu_);
  *log_ << j.dump() << '\n';
  log_->flush();
}

BackendClient::Sent BackendClient::send_with_retries(const ChatRequest& request) {
  const auto schedule = retry_schedule(cfg_.max_retries, cfg_.retry_base_delay);
  for (std::size_t attempt = 0;; ++attempt) {
    ++attempts_;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ChatResponse resp;
      {
        SlotGuard slot(limiter_);
        resp = transport_->send(request);
      }
      const double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double latency = resp.latency.value_or(measured);
      log_attempt(request, attempt, "ok", latency);
      return {std::move(resp), latency, attempt};
    } catch (const TransientBackendError& e) {
      const double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_attempt(request, attempt, e.what(), measured);
      if (attempt >= cfg_.max_retries)
        throw BackendError("request " + request.correlation_id + " failed after " + std::to_string(attempt + 1) +
                           " attempts: " + e.what());
      ++retries_;
      sleeper_(schedule[attempt]);
    } catch (const std::exception& e) {
      const double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_attempt(request, attempt, e.what(), measured);
      throw;
    }
  }
}

std::vector<Completion> BackendClient::to_completions(const ChatRequest& request, const Sent& sent,
                                                      std::size_t want) {
  if (sent.response.choices.empty()) throw BackendError("malformed response: no choices");
  std::vector<Completion> out;
  const std::size_t n = std::min(want, sent.response.choices.size());
  const bool single = sent.response.choices.size() == 1;
  for (std::size_t i = 0; i < n; ++i) {
    Completion c;
    c.text = sent.response.choices[i];
    c.prompt_tokens = sent.response.prompt_tokens.value_or(counter_.count(request.user_content));
    c.completion_tokens = single && sent.response.completion_tokens ? *sent.response.completion_tokens
                                                                    : counter_.count(c.text);
    c.latency = sent.latency;
    c.retries = sent.retries;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Completion> BackendClient::complete(const Prompt& prompt, const DecodeParams& params) {
  return complete_content(prompt.user_content(), params);
}

std::vector<Completion> BackendClient::complete_content(const std::string& user_content, const DecodeParams& params) {
  params.validate();
  const std::size_t want = params.mode == DecodeMode::greedy ? 1 : params.n_candidates;
  const std::size_t max_tokens =
      params.max_new_tokens ? params.max_new_tokens : std::max<std::size_t>(16, 2 * counter_.count(user_content));
  const std::string base_id = sha256_hex(user_content).substr(0, 16);

  auto make_request = [&](std::size_t sample_index, std::size_t n) {
    ChatRequest r;
    r.correlation_id = base_id + "#" + std::to_string(sample_index);
    r.user_content = user_content;
    r.params = params;
    r.params.n_candidates = n;
    r.sample_index = sample_index;
    r.max_tokens = max_tokens;
    return r;
  };

  std::vector<Completion> out;
  if (want == 1 || cfg_.native_n) {
    const ChatRequest req = make_request(0, want);
    out = to_completions(req, send_with_retries(req), want);
    if (out.size() == want) return out;
  }
  // Independent single-sample requests for whatever is still missing,
  // reassembled by sample index.
  const std::size_t first = out.size();
  std::vector<std::future<std::vector<Completion>>> pending;
  for (std::size_t i = first; i < want; ++i) {
    pending.push_back(std::async(std::launch::async, [this, req = make_request(i, 1)] {
      return to_completions(req, send_with_retries(req), 1);
    }));
  }
  std::exception_ptr first_error;
  for (auto& f : pending) {
    try {
      auto got = f.get();
      out.push_back(std::move(got.front()));
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

// ---- Mock -------------------------------------------------------------------------

std::string to_string(MockBehavior b) {
  switch (b) {
    case MockBehavior::identity:
      return "identity";
    case MockBehavior::reverse_words:
      return "reverse_words";
    case MockBehavior::table:
      return "table";
    case MockBehavior::scripted:
      return "scripted";
    case MockBehavior::noisy:
      return "noisy";
  }
  return "identity";
}

MockBehavior mock_behavior_from_string(std::string_view s) {
  if (s == "identity") return MockBehavior::identity;
  if (s == "reverse_words") return MockBehavior::reverse_words;
  if (s == "table") return MockBehavior::table;
  if (s == "scripted") return MockBehavior::scripted;
  if (s == "noisy") return MockBehavior::noisy;
  throw ValidationError("unknown mock behavior '" + std::string(s) + "'");
}

MockTransport::MockTransport(Options options) : opts_(std::move(options)) {
  if (opts_.behavior == MockBehavior::scripted && !opts_.script)
    throw ValidationError("scripted mock needs a script");
}

std::shared_ptr<MockTransport> MockTransport::make(MockBehavior behavior) {
  Options o;
  o.behavior = behavior;
  return std::make_shared<MockTransport>(std::move(o));
}

std::string MockTransport::reverse_words(std::string_view s) {
  std::vector<std::string> lines;
  for (const auto& line : text::split(s, '\n')) {
    auto words = text::split_whitespace(line);
    std::reverse(words.begin(), words.end());
    lines.push_back(text::join(words, " "));
  }
  return text::join(lines, "\n");
}

std::string MockTransport::perturb(std::string_view s, uint64_t key) {
  Rng rng(key);
  std::vector<std::string> lines;
  for (const auto& line : text::split(s, '\n')) {
    auto words = text::split_whitespace(line);
    if (words.size() >= 2) {
      switch (rng.below(4)) {
        case 0:
          words.erase(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size())));
          break;
        case 1: {
          auto i = rng.below(words.size());
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(i), words[i]);
          break;
        }
        case 2: {
          auto i = rng.below(words.size() - 1);
          std::swap(words[i], words[i + 1]);
          break;
        }
        default:
          break;
      }
    }
    lines.push_back(words.empty() ? line : text::join(words, " "));
  }
  return text::join(lines, "\n");
}

std::string MockTransport::respond(const ChatRequest& request, std::size_t call_index, std::size_t choice,
                                   int& status) {
  std::string payload;
  try {
    payload = parse_user_content(request.user_content).source;
  } catch (const ValidationError&) {
    payload = request.user_content;
  }
  status = 200;
  switch (opts_.behavior) {
    case MockBehavior::identity:
      return payload + ".";
    case MockBehavior::reverse_words:
      return reverse_words(payload) + ".";
    case MockBehavior::table: {
      auto it = opts_.table.find(payload);
      if (it == opts_.table.end()) throw BackendError("mock table has no entry for '" + payload + "'");
      return it->second + ".";
    }
    case MockBehavior::scripted: {
      MockReply reply = opts_.script(request, call_index, choice);
      status = reply.status;
      return reply.text + ".";
    }
    case MockBehavior::noisy: {
      const uint64_t key = fnv1a64(payload, opts_.seed ^ 0x9e3779b97f4a7c15ULL) ^
                           ((request.sample_index + choice + 1) * 0xbf58476d1ce4e5b9ULL);
      return perturb(payload, key) + ".";
    }
  }
  return payload + ".";
}

ChatResponse MockTransport::send(const ChatRequest& request) {
  const std::size_t call_index = calls_++;
  const std::size_t now = ++in_flight_;
  std::size_t seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  struct Leave {
    std::atomic<std::size_t>& c;
    ~Leave() { --c; }
  } leave{in_flight_};
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
  }

  ChatResponse resp;
  const std::size_t n = opts_.native_n ? std::max<std::size_t>(1, request.params.n_candidates) : 1;
  for (std::size_t c = 0; c < n; ++c) {
    int status = 200;
    std::string text = respond(request, call_index, c, status);
    if (status != 200) throw_for_status(status, "mock");
    resp.choices.push_back(std::move(text));
  }
  std::size_t longest = 0;
  for (const auto& c : resp.choices) longest = std::max(longest, text::count_words(c));
  const auto delay = opts_.latency + opts_.latency_per_word * static_cast<long>(longest);
  if (opts_.sleep && delay.count() > 0) std::this_thread::sleep_for(delay);
  resp.latency = std::chrono::duration<double>(delay).count();
  if (opts_.report_usage) {
    resp.prompt_tokens = text::count_words(request.user_content);
    std::size_t total = 0;
    for (const auto& c : resp.choices) total += text::count_words(c);
    resp.completion_tokens = total;
  }
  return resp;
}

std::vector<ChatRequest> MockTransport::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::string strip_template(std::string_view completion) {
  std::string_view s = completion;
  if (s.size() >= kTurnEnd.size() && s.substr(s.size() - kTurnEnd.size()) == kTurnEnd) s.remove_suffix(kTurnEnd.size());
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return std::string(s);
}

}  // namespace docmt

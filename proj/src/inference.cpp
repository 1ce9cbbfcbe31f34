#include "docmt/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <queue>

#include "docmt/hash.hpp"
#include "docmt/prompt.hpp"
#include "docmt/text.hpp"

namespace docmt {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> source_chunks(const ParallelDoc& doc, const ChunkingSpec& spec, const TokenCounter& counter) {
  spec.validate();
  return chunk_texts(doc.src_segments, spec, counter);
}

Prompt render_chunk(const ParallelDoc& doc, const std::string& source, const Context& ctx, PromptMode mode) {
  ContextualExample ex;
  ex.src_lang = doc.src_lang;
  ex.tgt_lang = doc.tgt_lang;
  ex.context = ctx;
  ex.source = source;
  return render(ex, mode);
}

Context last_pairs(const std::vector<std::string>& sources, const std::vector<std::string>& outputs, std::size_t n) {
  const std::size_t i = outputs.size();
  const std::size_t from = i > n ? i - n : 0;
  Context ctx;
  for (std::size_t k = from; k < i; ++k) ctx.push_back({sources[k], outputs[k]});
  return ctx;
}

TranslationRun start_run(const ParallelDoc& doc, InferenceMode mode, const InferenceOptions& opts) {
  TranslationRun run;
  run.doc_id = doc.doc_id;
  run.mode = mode;
  run.chunking = opts.chunking;
  return run;
}

LedgerEntry ledger_entry(const TranslationRun& run, std::size_t chunk, const Prompt& prompt, const Completion& c,
                         std::size_t context_pairs) {
  LedgerEntry e;
  e.doc_id = run.doc_id;
  e.mode = run.mode;
  e.chunk_index = chunk;
  e.prompt_sha256 = sha256_hex(prompt.user_content());
  e.output = strip_template(c.text);
  e.latency = c.latency;
  e.context_pairs = context_pairs;
  return e;
}

void finish(TranslationRun& run, const InferenceOptions& opts, Clock::time_point t0, double simulated) {
  run.wall_seconds = opts.timing == TimingMode::wall ? std::chrono::duration<double>(Clock::now() - t0).count()
                                                      : simulated;
  run.finalize();
}

// Sequential loop shared by the contextual and quality-aware modes. `pick`
// chooses the committed completion among those returned for one prompt and
// may annotate the ledger entry.
template <typename Pick>
TranslationRun sequential_run(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts,
                              InferenceMode mode, Pick pick) {
  const auto t0 = Clock::now();
  TranslationRun run = start_run(doc, mode, opts);
  run.sources = source_chunks(doc, opts.chunking, backend.counter());
  double simulated = 0.0;
  for (std::size_t i = 0; i < run.sources.size(); ++i) {
    const Context ctx = last_pairs(run.sources, run.outputs, opts.context_window);
    const Prompt prompt = render_chunk(doc, run.sources[i], ctx, PromptMode::contextual);
    std::vector<Completion> got;
    try {
      got = backend.complete(prompt, opts.params);
    } catch (const std::exception& e) {
      finish(run, opts, t0, simulated);
      throw RunAborted("doc '" + doc.doc_id + "' chunk " + std::to_string(i) + ": " + e.what(), run);
    }
    if (got.empty()) throw BackendError("backend returned no completions");
    LedgerEntry entry = ledger_entry(run, i, prompt, got.front(), ctx.size());
    double elapsed = 0.0;
    std::size_t chosen;
    try {
      chosen = pick(got, ctx, entry, elapsed);
    } catch (const std::exception& e) {
      finish(run, opts, t0, simulated);
      throw RunAborted("doc '" + doc.doc_id + "' chunk " + std::to_string(i) + ": " + e.what(), run);
    }
    const Completion& c = got[chosen];
    entry.output = strip_template(c.text);
    entry.latency = elapsed;
    simulated += elapsed;
    run.tokens_in += backend.counter().count(run.sources[i]);
    run.tokens_out += c.completion_tokens;
    run.outputs.push_back(entry.output);
    run.ledger.push_back(std::move(entry));
  }
  finish(run, opts, t0, simulated);
  return run;
}

}  // namespace

std::string to_string(InferenceMode mode) {
  switch (mode) {
    case InferenceMode::doc2doc:
      return "doc2doc";
    case InferenceMode::chunk:
      return "chunk";
    case InferenceMode::context_chunk:
      return "context_chunk";
    case InferenceMode::quality_chunk:
      return "quality_chunk";
  }
  return "doc2doc";
}

InferenceMode inference_mode_from_string(std::string_view s) {
  if (s == "doc2doc") return InferenceMode::doc2doc;
  if (s == "chunk") return InferenceMode::chunk;
  if (s == "context_chunk") return InferenceMode::context_chunk;
  if (s == "quality_chunk") return InferenceMode::quality_chunk;
  throw ValidationError("unknown inference mode '" + std::string(s) + "'");
}

std::string to_string(TimingMode mode) { return mode == TimingMode::wall ? "wall" : "simulated"; }

TimingMode timing_mode_from_string(std::string_view s) {
  if (s == "wall") return TimingMode::wall;
  if (s == "simulated") return TimingMode::simulated;
  throw ValidationError("unknown timing mode '" + std::string(s) + "'");
}

CandidateSet mbr_select(const std::vector<std::string>& candidates, const Context& context, UtilityMetric& utility) {
  if (candidates.empty()) throw ValidationError("mbr_select needs at least one candidate");
  const std::size_t n = candidates.size();
  CandidateSet set;
  set.candidates = candidates;
  set.context = context;
  const Context none;
  const Context& ctx = utility.use_context() ? context : none;
  set.utility_matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t y = 0; y < n; ++y) {
      const double u = utility.score(candidates[y], candidates[t], ctx);
      if (!std::isfinite(u)) throw ScorerError("utility returned a non-finite value");
      set.utility_matrix[t][y] = u;
    }
  }
  set.expected_utility.assign(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) sum += set.utility_matrix[t][y];
    set.expected_utility[y] = sum / static_cast<double>(n);
  }
  for (std::size_t y = 1; y < n; ++y) {
    if (set.expected_utility[y] > set.expected_utility[set.chosen_index]) set.chosen_index = y;
  }
  return set;
}

nlohmann::ordered_json LedgerEntry::to_json() const {
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  j["mode"] = to_string(mode);
  j["chunk_index"] = chunk_index;
  j["prompt_sha256"] = prompt_sha256;
  j["output"] = output;
  j["latency"] = latency;
  j["context_pairs"] = context_pairs;
  if (!candidates.empty()) j["candidates"] = candidates;
  if (chosen_index) j["chosen_index"] = *chosen_index;
  return j;
}

void TranslationRun::finalize() {
  merged = text::join(outputs, std::string(1, kChunkJoiner));
  const double tokens = static_cast<double>(tokens_in + tokens_out);
  throughput = wall_seconds > 0.0 ? tokens / wall_seconds : 0.0;
}

nlohmann::ordered_json TranslationRun::to_json() const {
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  j["mode"] = to_string(mode);
  j["chunk_unit"] = to_string(chunking.unit);
  j["chunk_size"] = chunking.size;
  j["outputs"] = outputs;
  j["merged"] = merged;
  j["tokens_in"] = tokens_in;
  j["tokens_out"] = tokens_out;
  j["wall_seconds"] = wall_seconds;
  j["throughput"] = throughput;
  return j;
}

TranslationRun TranslationRun::from_json(const nlohmann::json& j) {
  TranslationRun run;
  try {
    run.doc_id = j.at("doc_id").get<std::string>();
    run.mode = inference_mode_from_string(j.at("mode").get<std::string>());
    run.chunking.unit = chunk_unit_from_string(j.at("chunk_unit").get<std::string>());
    run.chunking.size = j.at("chunk_size").get<std::size_t>();
    run.outputs = j.at("outputs").get<std::vector<std::string>>();
    run.merged = j.at("merged").get<std::string>();
    run.tokens_in = j.at("tokens_in").get<std::size_t>();
    run.tokens_out = j.at("tokens_out").get<std::size_t>();
    run.wall_seconds = j.at("wall_seconds").get<double>();
    run.throughput = j.at("throughput").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run record: ") + e.what());
  }
  return run;
}

double list_schedule_makespan(const std::vector<double>& durations, std::size_t workers) {
  if (workers == 0) throw ValidationError("need at least one worker");
  std::priority_queue<double, std::vector<double>, std::greater<>> lanes;
  for (std::size_t i = 0; i < workers; ++i) lanes.push(0.0);
  double makespan = 0.0;
  for (double d : durations) {
    const double start = lanes.top();
    lanes.pop();
    lanes.push(start + d);
    makespan = std::max(makespan, start + d);
  }
  return makespan;
}

TranslationRun translate_doc2doc(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts) {
  const auto t0 = Clock::now();
  TranslationRun run = start_run(doc, InferenceMode::doc2doc, opts);
  run.sources = {text::join(doc.src_segments, std::string(1, kChunkJoiner))};
  const Prompt prompt = render_chunk(doc, run.sources.front(), {}, PromptMode::doc2doc);
  const auto& counter = backend.counter();
  const std::size_t output_estimate =
      opts.params.max_new_tokens ? opts.params.max_new_tokens : counter.count(run.sources.front());
  const std::size_t need = counter.count(prompt.user_content()) + output_estimate;
  if (need > opts.context_limit)
    throw ValidationError("doc '" + doc.doc_id + "' needs about " + std::to_string(need) +
                          " tokens, over the context limit of " + std::to_string(opts.context_limit) +
                          "; use a chunked mode");
  std::vector<Completion> got;
  try {
    got = backend.complete(prompt, opts.params);
  } catch (const std::exception& e) {
    finish(run, opts, t0, 0.0);
    throw RunAborted("doc '" + doc.doc_id + "': " + e.what(), run);
  }
  const Completion& c = got.front();
  run.ledger.push_back(ledger_entry(run, 0, prompt, c, 0));
  run.outputs.push_back(run.ledger.back().output);
  run.tokens_in = counter.count(run.sources.front());
  run.tokens_out = c.completion_tokens;
  finish(run, opts, t0, c.latency);
  return run;
}

TranslationRun translate_chunked(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts) {
  const auto t0 = Clock::now();
  TranslationRun run = start_run(doc, InferenceMode::chunk, opts);
  run.sources = source_chunks(doc, opts.chunking, backend.counter());
  std::vector<Prompt> prompts;
  for (const auto& s : run.sources) prompts.push_back(render_chunk(doc, s, {}, PromptMode::sentence));

  std::vector<std::future<Completion>> pending;
  for (const auto& p : prompts) {
    pending.push_back(std::async(std::launch::async, [&backend, &p, &opts] {
      return backend.complete(p, opts.params).front();
    }));
  }
  std::vector<std::optional<Completion>> done(prompts.size());
  std::string first_error;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    try {
      done[i] = pending[i].get();
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = "chunk " + std::to_string(i) + ": " + e.what();
    }
  }

  std::vector<double> latencies;
  for (std::size_t i = 0; i < done.size(); ++i) {
    if (!done[i]) continue;
    run.ledger.push_back(ledger_entry(run, i, prompts[i], *done[i], 0));
    latencies.push_back(done[i]->latency);
  }
  for (std::size_t i = 0; i < done.size() && done[i]; ++i) {
    run.outputs.push_back(strip_template(done[i]->text));
    run.tokens_in += backend.counter().count(run.sources[i]);
    run.tokens_out += done[i]->completion_tokens;
  }
  finish(run, opts, t0, list_schedule_makespan(latencies, backend.config().max_concurrency));
  if (!first_error.empty()) throw RunAborted("doc '" + doc.doc_id + "' " + first_error, run);
  return run;
}

TranslationRun translate_contextual(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts) {
  return sequential_run(doc, backend, opts, InferenceMode::context_chunk,
                        [](const std::vector<Completion>& got, const Context&, LedgerEntry&, double& elapsed) {
                          elapsed = got.front().latency;
                          return std::size_t{0};
                        });
}

TranslationRun translate_quality_aware(const ParallelDoc& doc, BackendClient& backend, UtilityMetric& utility,
                                       const InferenceOptions& opts) {
  if (opts.params.mode != DecodeMode::nucleus)
    throw ValidationError("quality-aware chunking samples candidates; use nucleus decoding");
  const auto& counter = backend.counter();
  const std::size_t limit = opts.utility_context_limit;
  const std::size_t workers = backend.config().native_n ? 0 : backend.config().max_concurrency;
  return sequential_run(
      doc, backend, opts, InferenceMode::quality_chunk,
      [&](const std::vector<Completion>& got, const Context& ctx, LedgerEntry& entry, double& elapsed) {
        std::vector<std::string> candidates;
        std::vector<double> latencies;
        std::size_t longest = 0;
        for (const auto& c : got) {
          candidates.push_back(strip_template(c.text));
          latencies.push_back(c.latency);
          longest = std::max(longest, counter.count(candidates.back()));
        }
        elapsed = workers == 0 ? got.front().latency : list_schedule_makespan(latencies, workers);

        Context metric_ctx;
        if (utility.use_context()) {
          metric_ctx = ctx;
          auto size = [&] {
            std::size_t total = longest;
            for (const auto& p : metric_ctx) total += counter.count(p.src) + counter.count(p.tgt);
            return total;
          };
          while (!metric_ctx.empty() && size() > limit) metric_ctx.erase(metric_ctx.begin());
        }
        const CandidateSet set = mbr_select(candidates, metric_ctx, utility);
        entry.candidates = candidates;
        entry.chosen_index = set.chosen_index;
        return set.chosen_index;
      });
}

TranslationRun translate(InferenceMode mode, const ParallelDoc& doc, BackendClient& backend,
                         const InferenceOptions& opts, UtilityMetric* utility) {
  switch (mode) {
    case InferenceMode::doc2doc:
      return translate_doc2doc(doc, backend, opts);
    case InferenceMode::chunk:
      return translate_chunked(doc, backend, opts);
    case InferenceMode::context_chunk:
      return translate_contextual(doc, backend, opts);
    case InferenceMode::quality_chunk:
      if (!utility) throw ValidationError("quality-aware chunking needs a utility metric");
      return translate_quality_aware(doc, backend, *utility, opts);
  }
  throw ValidationError("unknown inference mode");
}

ParallelDoc hypothesis_doc(const ParallelDoc& source_doc, const TranslationRun& run) {
  ParallelDoc d = source_doc;
  d.tgt_segments = text::split(run.merged, kChunkJoiner);
  return d;
}

}  // namespace docmt

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/augmentation.hpp"
#include "docmt/backend.hpp"
#include "docmt/corpus.hpp"
#include "docmt/scoring.hpp"

namespace docmt {

enum class InferenceMode { doc2doc, chunk, context_chunk, quality_chunk };

std::string to_string(InferenceMode mode);
InferenceMode inference_mode_from_string(std::string_view s);

// wall: elapsed steady-clock time. simulated: derived from the latencies the
// backend reports (sum for sequential modes, list-scheduling makespan over
// max_concurrency for concurrent requests), so runs against a non-sleeping
// mock are reproducible.
enum class TimingMode { wall, simulated };

std::string to_string(TimingMode mode);
TimingMode timing_mode_from_string(std::string_view s);

inline constexpr char kChunkJoiner = '\n';
inline constexpr std::size_t kUtilityContextLimit = 512;

struct InferenceOptions {
  ChunkingSpec chunking{};
  std::size_t context_window = kDefaultCaptWindow;  // N
  DecodeParams params = DecodeParams::greedy();
  std::size_t context_limit = kDefaultTokenBudget;  // doc2doc prompt + output estimate
  std::size_t utility_context_limit = kUtilityContextLimit;
  TimingMode timing = TimingMode::wall;
};

struct CandidateSet {
  std::vector<std::string> candidates;
  Context context;
  // matrix[t][y] = M(hyp = candidates[y], ref = candidates[t])
  std::vector<std::vector<double>> utility_matrix;
  std::vector<double> expected_utility;  // column means
  std::size_t chosen_index = 0;
};

// Argmax over candidates of the mean utility against every candidate taken as
// pseudo-reference (self included). Ties go to the lowest index. The context
// is handed to the utility only when it asks for it.
CandidateSet mbr_select(const std::vector<std::string>& candidates, const Context& context, UtilityMetric& utility);

struct LedgerEntry {
  std::string doc_id;
  InferenceMode mode = InferenceMode::doc2doc;
  std::size_t chunk_index = 0;
  std::string prompt_sha256;
  std::string output;
  double latency = 0.0;
  std::size_t context_pairs = 0;
  std::vector<std::string> candidates;  // quality mode only
  std::optional<std::size_t> chosen_index;

  nlohmann::ordered_json to_json() const;
};

struct TranslationRun {
  std::string doc_id;
  InferenceMode mode = InferenceMode::doc2doc;
  ChunkingSpec chunking{};
  std::vector<std::string> sources;  // source chunk texts
  std::vector<std::string> outputs;  // target chunk texts, chunk order
  std::string merged;
  std::size_t tokens_in = 0;   // source-text tokens translated (prompt scaffolding excluded)
  std::size_t tokens_out = 0;  // tokens of the committed outputs
  double wall_seconds = 0.0;
  double throughput = 0.0;  // (tokens_in + tokens_out) / wall_seconds; 0 when no time elapsed
  std::vector<LedgerEntry> ledger;

  void finalize();  // merged and throughput from the other fields
  nlohmann::ordered_json to_json() const;
  // Inverse of to_json; the ledger is not part of the export.
  static TranslationRun from_json(const nlohmann::json& j);
};

// Raised when a backend call fails mid-document; carries the chunks
// completed so far.
class RunAborted : public BackendError {
 public:
  RunAborted(const std::string& what, TranslationRun partial) : BackendError(what), partial(std::move(partial)) {}
  TranslationRun partial;
};

TranslationRun translate_doc2doc(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts = {});
TranslationRun translate_chunked(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts = {});
TranslationRun translate_contextual(const ParallelDoc& doc, BackendClient& backend, const InferenceOptions& opts = {});
// opts.params must be nucleus sampling.
TranslationRun translate_quality_aware(const ParallelDoc& doc, BackendClient& backend, UtilityMetric& utility,
                                       const InferenceOptions& opts);

// Dispatch on mode; `utility` is required for quality_chunk.
TranslationRun translate(InferenceMode mode, const ParallelDoc& doc, BackendClient& backend,
                         const InferenceOptions& opts, UtilityMetric* utility = nullptr);

// Makespan of `durations` greedily assigned, in order, to `workers` lanes.
double list_schedule_makespan(const std::vector<double>& durations, std::size_t workers);

// The hypothesis document of a run: its merged text split on the joiner, as
// a ParallelDoc whose target side is the translation.
ParallelDoc hypothesis_doc(const ParallelDoc& source_doc, const TranslationRun& run);

}  // namespace docmt

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/context.hpp"
#include "docmt/corpus.hpp"
#include "docmt/tokens.hpp"

namespace docmt {

struct ChunkingSpec {
  enum class Unit { segments, tokens };
  Unit unit = Unit::segments;
  std::size_t size = 1;

  void validate() const;
};

std::string to_string(ChunkingSpec::Unit unit);
ChunkingSpec::Unit chunk_unit_from_string(std::string_view s);

// Groups consecutive items into chunks: `size` items per chunk for the
// segments unit; for the tokens unit, greedily while the chunk stays within
// `size` tokens (an oversized item forms its own chunk). Returns item index
// ranges as (begin, count).
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(const std::vector<std::string>& items,
                                                              const ChunkingSpec& spec,
                                                              const TokenCounter& counter = default_token_counter());

// Chunk texts: the segments of each chunk joined by the record separator.
std::vector<std::string> chunk_texts(const std::vector<std::string>& segments, const ChunkingSpec& spec,
                                     const TokenCounter& counter = default_token_counter());

inline constexpr std::size_t kDefaultCaptWindow = 3;

struct ContextualExample {
  LangCode src_lang;
  LangCode tgt_lang;
  Context context;  // oldest first
  std::string source;
  std::optional<std::string> target;

  friend bool operator==(const ContextualExample&, const ContextualExample&) = default;
  nlohmann::ordered_json to_json() const;
  static ContextualExample from_json(const nlohmann::json& j);
};

// Splits into min(k, |src|, |tgt|) contiguous parts at ceil(i*|S|/m) on the
// source side and ceil(i*|T|/m) on the target side. Part ids are
// "{doc_id}#k{k}p{i}" (i from 0); k == 1 returns the input unchanged.
std::vector<ParallelDoc> mrd2d_split(const ParallelDoc& doc, std::size_t k,
                                     const std::set<std::size_t>& allowed = {1, 2, 4});

// Source/target unit pairs of a document: positional when the segment counts
// match, otherwise the sentence aligner's 1-1/1-2/2-1 links. Throws
// ValidationError when the aligner leaves segments unlinked.
std::vector<ContextPair> aligned_segment_pairs(const ParallelDoc& doc);

// One example per chunk; example i carries chunks max(0, i-n)..i-1 with
// their reference targets.
std::vector<ContextualExample> build_capt_examples(const ParallelDoc& doc, const ChunkingSpec& spec,
                                                   std::size_t n = kDefaultCaptWindow,
                                                   const TokenCounter& counter = default_token_counter());

struct ConcatResult {
  std::vector<ParallelDoc> docs;
  std::vector<std::string> warnings;
};

// Greedy in input order: a document joins the current group while the group's
// counter(src) + counter(tgt) stays within `budget`. Groups never span a
// change of (language pair, domain). Merged ids join member ids with '+'.
ConcatResult concat_to_budget(const std::vector<ParallelDoc>& docs, std::size_t budget = kDefaultTokenBudget,
                              const TokenCounter& counter = default_token_counter());

struct MixResult {
  Corpus corpus;
  std::size_t sentence_records = 0;
  std::vector<std::string> warnings;
};

// Adds round(f * n_docs / (1 - f)) sentence-level records, spread evenly over
// the sentence corpus' language pairs, then shuffles with `seed`.
MixResult mix_corpora(const Corpus& doc_corpus, const Corpus& sent_corpus, double sentence_fraction,
                      uint64_t seed);

struct AugmentConfig {
  std::vector<std::size_t> mrd2d_ks{1, 2, 4};
  std::size_t capt_window = kDefaultCaptWindow;
  std::size_t token_budget = kDefaultTokenBudget;
  double sentence_fraction = 0.10;
  ChunkingSpec capt_chunking{};
  // Per-domain switches; domains absent from the map use the defaults.
  struct CorpusFlags {
    bool mrd2d = true;
    bool capt = true;
  };
  std::map<std::string, CorpusFlags> per_corpus;
  CorpusFlags defaults{};

  const CorpusFlags& flags_for(const std::string& domain) const;
  void apply_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct AugmentResult {
  Corpus corpus;
  std::vector<ContextualExample> capt_examples;
  std::vector<std::string> warnings;
};

// concat_to_budget per (pair, domain) run -> MRD2D parts for every configured
// k -> optional sentence mixing. CAPT examples are built from the
// budget-concatenated documents of CAPT-enabled domains.
AugmentResult augment_corpus(const Corpus& input, const AugmentConfig& cfg, const Corpus* sentences, uint64_t seed,
                             const TokenCounter& counter = default_token_counter());

}  // namespace docmt

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/scoring.hpp"
#include "docmt/tokens.hpp"

namespace docmt {

// ---- BLEU ------------------------------------------------------------------

// Whitespace split, punctuation isolated into its own token (except '.' or ','
// between digits), Han/Hiragana/Katakana split per character.
std::vector<std::string> bleu_tokenize(std::string_view text);

struct BleuScore {
  double score = 0.0;  // [0, 100]
  double bp = 0.0;     // (0, 1]; 0 for an empty hypothesis
  std::array<double, 4> precisions{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  // "37.57 (1.00)"
  std::string format_with_bp() const;
};

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len);

// Corpus BLEU-4 with clipped counts summed over pairs. No smoothing: any zero
// precision gives score 0.
BleuScore bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

// BLEU of the single-space concatenations of each side.
BleuScore d_bleu(const std::vector<std::string>& hyp_doc, const std::vector<std::string>& ref_doc);

// Corpus d-BLEU: one concatenated segment per document.
BleuScore d_bleu_corpus(const std::vector<std::vector<std::string>>& hyp_docs,
                        const std::vector<std::vector<std::string>>& ref_docs);

// ---- Sentence alignment ----------------------------------------------------

using Similarity = std::function<double(std::string_view, std::string_view)>;

// 2 * |bigram overlap| / (|bigrams a| + |bigrams b|) over code points.
double char_bigram_fscore(std::string_view a, std::string_view b);

struct AlignmentLink {
  std::size_t hyp_begin = 0;
  std::size_t hyp_count = 0;  // 1 or 2
  std::size_t ref_begin = 0;
  std::size_t ref_count = 0;  // 1 or 2
  double similarity = 0.0;
  friend bool operator==(const AlignmentLink&, const AlignmentLink&) = default;
};

struct Alignment {
  std::vector<AlignmentLink> links;
  std::vector<std::size_t> null_hyp;  // unlinked hypothesis sentences
  std::vector<std::size_t> null_ref;  // unlinked reference sentences

  double total_similarity() const;
};

// Monotonic alignment maximizing summed link similarity, links 1-1, 1-2 or
// 2-1, plus null moves. Similarity of a 2-sided link is taken on the
// single-space concatenation of the grouped sentences. On ties, links are
// preferred over null moves and 1-1 over 1-2 / 2-1.
Alignment align_sentences(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                          const Similarity& sim = char_bigram_fscore);

struct SentencePair {
  std::string src;
  std::string hyp;
  std::string ref;
};

// Sentence triples for sentence-level metrics: hypotheses aligned to the
// reference, source taken positionally from the reference side (the test set
// is sentence-parallel). Null-aligned sentences pair with an empty side.
std::vector<SentencePair> aligned_triples(const std::vector<std::string>& src,
                                          const std::vector<std::string>& hyp,
                                          const std::vector<std::string>& ref,
                                          const Similarity& sim = char_bigram_fscore);

// ---- LTCR -------------------------------------------------------------------

// For each source token, the aligned target token or nullopt. May throw, in
// which case the sentence is skipped.
class WordAligner {
 public:
  virtual ~WordAligner() = default;
  virtual std::vector<std::optional<std::string>> align(const std::vector<std::string>& src_tokens,
                                                        const std::vector<std::string>& tgt_tokens) = 0;
};

// Links each source token to the target token sharing the most characters
// (multiset intersection of code points); first wins ties; zero overlap is
// unaligned.
class CharOverlapAligner final : public WordAligner {
 public:
  std::vector<std::optional<std::string>> align(const std::vector<std::string>& src_tokens,
                                                const std::vector<std::string>& tgt_tokens) override;
};

struct LtcrOptions {
  std::size_t min_repeat = 2;
  std::size_t min_term_length = 4;
  std::set<std::string, std::less<>> stoplist = default_ltcr_stoplist();

  static std::set<std::string, std::less<>> default_ltcr_stoplist();
};

// Casefolded runs of alphabetic characters.
std::vector<std::string> ltcr_tokenize(std::string_view text);

struct LtcrTerm {
  std::size_t doc_index = 0;
  std::string term;
  std::size_t occurrences = 0;
  std::size_t consistent_pairs = 0;
  std::size_t total_pairs = 0;
};

struct LtcrResult {
  std::size_t consistent_pairs = 0;
  std::size_t total_pairs = 0;
  std::size_t skipped_occurrences = 0;
  std::optional<double> ratio;  // absent when no repeated term
  std::vector<LtcrTerm> terms;
};

// One document = its (source sentence, hypothesis sentence) pairs; only the
// src and hyp fields of SentencePair are read.
LtcrResult ltcr(const std::vector<std::vector<SentencePair>>& docs, WordAligner& aligner,
                const LtcrOptions& options = {});

// ---- SLIDE ------------------------------------------------------------------

struct SlideOptions {
  std::size_t window = 512;
  std::size_t stride = 256;
};

struct SlideUnitWindow {
  std::size_t start_token = 0;
  std::vector<std::size_t> units;
};

// Windows [i*stride, i*stride + window) over the unit stream with the given
// token lengths; the last window is anchored at the end. A unit belongs to a
// window when its whole span lies inside; a window that would be empty takes
// the unit covering its start. Consecutive identical windows collapse.
std::vector<SlideUnitWindow> slide_windows(const std::vector<std::size_t>& unit_lengths,
                                           const SlideOptions& options);

// Mean window score over the aligned sentence stream. Unit length is the
// largest token count among the unit's src/hyp/ref texts.
double slide_score(const std::vector<std::string>& hyp_doc, const std::vector<std::string>& ref_doc,
                   const std::vector<std::string>& src_doc, ChunkScorer& scorer,
                   const TokenCounter& counter = default_token_counter(), const SlideOptions& options = {});

double slide_score(const std::vector<SentencePair>& stream, ChunkScorer& scorer,
                   const TokenCounter& counter = default_token_counter(), const SlideOptions& options = {});

}  // namespace docmt

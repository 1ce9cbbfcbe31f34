#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/corpus.hpp"
#include "docmt/error.hpp"
#include "docmt/scoring.hpp"

namespace docmt {

struct FilterConfig {
  std::size_t min_words = 50;
  double identical_fraction_max = 0.10;
  double length_ratio_max = 1.3;
  double qe_segment_threshold = 0.65;
  double fluency_segment_threshold = 0.5;
  double doc_bad_fraction_max = 0.20;
  double lid_min_confidence = 0.5;
  // Shortest shared substring (code points) counted as copied text.
  std::size_t copy_substring_min = 8;

  void validate() const;
  // Overrides fields present in `j` (same key names); validates.
  void apply_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

enum class DropReason { MIN_WORDS, IDENTICAL_FRACTION, LENGTH_RATIO, QE_BELOW, FLUENCY_BELOW, LANG_MISMATCH, DUPLICATE };

std::string to_string(DropReason r);

struct SegmentVerdict {
  bool keep = true;
  std::vector<DropReason> reasons;

  void add(DropReason r) {
    reasons.push_back(r);
    keep = false;
  }
};

// The three copy-through measures, each relative to the longer side.
struct IdenticalFractions {
  double words = 0.0;     // multiset word overlap / max word count
  double numerals = 0.0;  // shared numeral tokens / max word count
  double chars = 0.0;     // chars covered by shared substrings / max char count
};

IdenticalFractions identical_fractions(std::string_view src, std::string_view tgt, std::size_t substring_min = 8);

// Length ratio of whitespace word counts, max/min (infinite when one side is
// empty and the other is not).
double length_ratio(std::string_view src, std::string_view tgt);

SegmentVerdict heuristic_verdict(std::string_view src, std::string_view tgt, const FilterConfig& cfg);
// Applied to the whole document: segments joined by spaces.
SegmentVerdict heuristic_verdict(const ParallelDoc& doc, const FilterConfig& cfg);

// keep iff (#scores below threshold) / #scores <= max_bad_fraction.
bool qe_document_filter(std::span<const double> scores, double threshold, double max_bad_fraction);
bool qe_document_filter(const ParallelDoc& doc, std::span<const double> scores, const FilterConfig& cfg);

// Scores every aligned segment pair of the document with the configured
// scorers (either may be null) and drops it when more than
// doc_bad_fraction_max of the units are bad. A unit is bad when it falls below
// either threshold; segments the aligner leaves unlinked count as bad.
SegmentVerdict qe_verdict(const ParallelDoc& doc, ScorerClient* qe, ScorerClient* fluency, const FilterConfig& cfg);

bool language_filter(const ParallelDoc& doc, LanguageIdentifier& lid, double min_confidence);

// NFC + casefold + whitespace-collapsed concatenation of each side.
std::string dedup_key(const ParallelDoc& doc);
Corpus deduplicate(const Corpus& corpus);

// Downsamples each language pair, separately for the en->xx and xx->en
// groups, to the size of the smallest pair in its group. Order preserved.
Corpus balance_corpus(const Corpus& corpus, uint64_t seed);

struct DropRecord {
  std::string doc_id;
  std::string stage;
  std::vector<std::string> reasons;

  nlohmann::ordered_json to_json() const;
};

struct PipelineResult {
  Corpus corpus;
  StatsReport pre;
  StatsReport post;
  std::vector<DropRecord> log;
  std::vector<std::string> notices;
};

class PipelineAborted : public ScorerError {
 public:
  PipelineAborted(const std::string& what, std::vector<DropRecord> partial)
      : ScorerError(what), partial_log(std::move(partial)) {}
  std::vector<DropRecord> partial_log;
};

struct PipelineScorers {
  ScorerClient* qe = nullptr;
  ScorerClient* fluency = nullptr;
  LanguageIdentifier* lid = nullptr;
};

// Stages in order: heuristic -> qe -> language -> dedup. A stage whose scorer
// is missing is skipped and noted. Scorer or identifier failures throw
// PipelineAborted carrying the log so far.
PipelineResult run_pipeline(const Corpus& corpus, const FilterConfig& cfg, const PipelineScorers& scorers = {});

}  // namespace docmt

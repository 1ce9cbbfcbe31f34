#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/corpus.hpp"
#include "docmt/evaluation.hpp"
#include "docmt/inference.hpp"

namespace docmt {

// Optional model-backed metrics. Missing members leave their columns absent.
struct EvalScorers {
  ScorerClient* sentence_metric = nullptr;  // reference-based, per aligned sentence
  ChunkScorer* window_metric = nullptr;     // SLIDE windows
  WordAligner* word_aligner = nullptr;      // LTCR; defaults to CharOverlapAligner
  SlideOptions slide{};
  LtcrOptions ltcr{};
};

struct EvalReport {
  std::string label;  // doc_id, or "corpus"
  std::size_t n_docs = 0;
  std::size_t n_sentences = 0;  // aligned sentence pairs
  BleuScore bleu;
  std::optional<double> comet;  // [0,1]
  BleuScore d_bleu;
  std::optional<double> d_comet;  // [0,1]
  LtcrResult ltcr;
  std::optional<double> throughput;
  std::vector<std::string> notices;

  nlohmann::ordered_json to_json() const;
  // "| label | BLEU | COMET | d-BLEU (BP) | d-COMET | LTCR |" with neural
  // scores and LTCR as percentages, "-" when absent.
  std::string table_row() const;
  static std::string table_header();
};

// The hypothesis is the run's merged text split on the chunk joiner. Sentence
// metrics use the alignment of hypothesis to reference; document metrics use
// the concatenations.
EvalReport evaluate(const TranslationRun& run, const ParallelDoc& ref, const EvalScorers& scorers = {});

// Lower-level entry taking the hypothesis sentences directly.
EvalReport evaluate_document(const std::string& doc_id, const std::vector<std::string>& hyp, const ParallelDoc& ref,
                             const EvalScorers& scorers = {});

struct CorpusEvalReport {
  std::vector<EvalReport> documents;
  EvalReport total;

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

// Pairs runs with reference docs by doc_id. Corpus BLEU pools all aligned
// sentences, d-BLEU pools documents, COMET and d-COMET average, LTCR pools
// pair counts, throughput divides total tokens by total seconds.
CorpusEvalReport evaluate_corpus(const std::vector<TranslationRun>& runs, const Corpus& refs,
                                 const EvalScorers& scorers = {});

}  // namespace docmt

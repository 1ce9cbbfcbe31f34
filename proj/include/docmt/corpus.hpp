#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docmt/lang.hpp"

namespace docmt {

// One source/target document pair. Alignment is at document level only:
// the two segment lists may differ in length.
struct ParallelDoc {
  std::string doc_id;
  LangCode src_lang;
  LangCode tgt_lang;
  std::vector<std::string> src_segments;
  std::vector<std::string> tgt_segments;
  std::string domain;
  std::map<std::string, std::string> meta;

  std::string lang_pair() const { return src_lang.str() + "-" + tgt_lang.str(); }

  friend bool operator==(const ParallelDoc&, const ParallelDoc&) = default;
};

// Segments never contain this; it separates records and chunk texts.
inline constexpr char kRecordSeparator = '\n';

struct Corpus {
  std::vector<ParallelDoc> docs;

  std::size_t size() const { return docs.size(); }
  bool empty() const { return docs.empty(); }
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// First violated invariant of a document, if any.
std::optional<std::string> validate_doc(const ParallelDoc& doc);

// Record (de)serialization. The parser NFC-normalizes text fields and
// validates; both throw ValidationError.
nlohmann::ordered_json doc_to_json(const ParallelDoc& doc);
ParallelDoc doc_from_json(const nlohmann::json& j,
                          const LanguageRegistry& registry = LanguageRegistry::standard());

Corpus load_corpus(const std::filesystem::path& path,
                   const LanguageRegistry& registry = LanguageRegistry::standard());
Corpus parse_corpus(std::string_view content,
                    const LanguageRegistry& registry = LanguageRegistry::standard());
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

struct StatsRow {
  std::string domain;
  std::string lang_pair;
  std::size_t n_docs = 0;
  std::size_t n_segments = 0;
  std::size_t n_words = 0;
  double avg_words_per_doc() const {
    return n_docs == 0 ? 0.0 : static_cast<double>(n_words) / static_cast<double>(n_docs);
  }
};

// Source-side counts grouped by (domain, language pair), plus totals.
struct StatsReport {
  std::vector<StatsRow> rows;
  StatsRow total;

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

StatsReport corpus_stats(const Corpus& corpus);

// Compact count formatting: 110000 -> "110.0K", 4400000 -> "4.4M", 876 -> "0.9K".
std::string format_count(double value);

}  // namespace docmt

#include "docmt/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

std::optional<std::string> validate_doc(const ParallelDoc& doc) {
  if (doc.doc_id.empty()) return "empty doc_id";
  if (doc.src_lang.str().empty() || doc.tgt_lang.str().empty()) return "missing language code";
  if (doc.src_lang == doc.tgt_lang) return "src_lang equals tgt_lang (" + doc.src_lang.str() + ")";
  if (doc.src_segments.empty()) return "no source segments";
  if (doc.tgt_segments.empty()) return "no target segments";
  for (const auto* side : {&doc.src_segments, &doc.tgt_segments}) {
    for (std::size_t i = 0; i < side->size(); ++i) {
      const auto& seg = (*side)[i];
      const char* name = side == &doc.src_segments ? "source" : "target";
      if (seg.empty()) return std::string("empty ") + name + " segment " + std::to_string(i);
      if (seg.find(kRecordSeparator) != std::string::npos)
        return std::string(name) + " segment " + std::to_string(i) + " contains a record separator";
      if (!text::is_valid_utf8(seg)) return std::string(name) + " segment " + std::to_string(i) + " is not UTF-8";
    }
  }
  return std::nullopt;
}

nlohmann::ordered_json doc_to_json(const ParallelDoc& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["src_lang"] = doc.src_lang.str();
  j["tgt_lang"] = doc.tgt_lang.str();
  j["domain"] = doc.domain;
  j["src_segments"] = doc.src_segments;
  j["tgt_segments"] = doc.tgt_segments;
  if (!doc.meta.empty()) j["meta"] = doc.meta;
  return j;
}

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {"doc_id",       "src_lang",     "tgt_lang", "domain",
                                                       "src_segments", "tgt_segments", "meta"};

std::string require_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing key '") + key + "'");
  if (!it->is_string()) throw ValidationError(std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> require_segments(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing key '") + key + "'");
  if (!it->is_array()) throw ValidationError(std::string("key '") + key + "' must be an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& s : *it) {
    if (!s.is_string()) throw ValidationError(std::string("key '") + key + "' must hold strings");
    out.push_back(text::nfc(s.get<std::string>()));
  }
  return out;
}

}  // namespace

ParallelDoc doc_from_json(const nlohmann::json& j, const LanguageRegistry& registry) {
  if (!j.is_object()) throw ValidationError("record is not an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.contains(key)) throw ValidationError("unexpected key '" + key + "'");
  }
  ParallelDoc doc;
  doc.doc_id = require_string(j, "doc_id");
  auto fail = [&](const std::string& what) -> ValidationError {
    return ValidationError("doc '" + doc.doc_id + "': " + what);
  };
  try {
    doc.src_lang = LangCode::parse(require_string(j, "src_lang"), registry);
    doc.tgt_lang = LangCode::parse(require_string(j, "tgt_lang"), registry);
    doc.domain = require_string(j, "domain");
    doc.src_segments = require_segments(j, "src_segments");
    doc.tgt_segments = require_segments(j, "tgt_segments");
    if (auto it = j.find("meta"); it != j.end()) {
      if (!it->is_object()) throw ValidationError("meta must be an object");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_string()) throw ValidationError("meta values must be strings");
        doc.meta[k] = v.get<std::string>();
      }
    }
  } catch (const ValidationError& e) {
    throw fail(e.what());
  }
  if (auto problem = validate_doc(doc)) throw fail(*problem);
  return doc;
}

Corpus parse_corpus(std::string_view content, const LanguageRegistry& registry) {
  Corpus corpus;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::collapse_whitespace(line).empty()) {
      if (end == content.size()) break;
      continue;
    }
    try {
      auto j = nlohmann::json::parse(line);
      ParallelDoc doc = doc_from_json(j, registry);
      if (!seen.insert(doc.doc_id).second) throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
      corpus.docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": parse error: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == content.size()) break;
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LanguageRegistry& registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_corpus(buf.str(), registry);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.docs) {
    out += doc_to_json(doc).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  out << serialize_corpus(corpus);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

StatsReport corpus_stats(const Corpus& corpus) {
  std::map<std::pair<std::string, std::string>, StatsRow> groups;
  StatsReport report;
  for (const auto& doc : corpus.docs) {
    auto& row = groups[{doc.domain, doc.src_lang.str() + "->" + doc.tgt_lang.str()}];
    row.domain = doc.domain;
    row.lang_pair = doc.src_lang.str() + "->" + doc.tgt_lang.str();
    std::size_t words = 0;
    for (const auto& seg : doc.src_segments) words += text::count_words(seg);
    row.n_docs += 1;
    row.n_segments += doc.src_segments.size();
    row.n_words += words;
  }
  report.total.domain = "total";
  report.total.lang_pair = "*";
  for (auto& [_, row] : groups) {
    report.total.n_docs += row.n_docs;
    report.total.n_segments += row.n_segments;
    report.total.n_words += row.n_words;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_count(double value) {
  char buf[64];
  if (value >= 1e6) {
    std::snprintf(buf, sizeof buf, "%.1fM", value / 1e6);
  } else if (value >= 100) {
    std::snprintf(buf, sizeof buf, "%.1fK", value / 1e3);
  } else if (value == std::floor(value)) {
    std::snprintf(buf, sizeof buf, "%.0f", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", value);
  }
  return buf;
}

namespace {

nlohmann::ordered_json row_json(const StatsRow& r) {
  nlohmann::ordered_json j;
  j["domain"] = r.domain;
  j["lang_pair"] = r.lang_pair;
  j["n_docs"] = r.n_docs;
  j["n_segments"] = r.n_segments;
  j["n_words"] = r.n_words;
  j["avg_words_per_doc"] = r.avg_words_per_doc();
  return j;
}

}  // namespace

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["word_side"] = "source";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) j["rows"].push_back(row_json(r));
  j["total"] = row_json(total);
  return j;
}

std::string StatsReport::to_table() const {
  std::ostringstream os;
  os << "# counts over source side; words = whitespace-delimited tokens\n";
  os << std::left << std::setw(16) << "Domain" << std::setw(10) << "Pair" << std::right << std::setw(10) << "|D|"
     << std::setw(10) << "|S|" << std::setw(10) << "|W|" << std::setw(10) << "|W|/|D|" << '\n';
  auto line = [&](const StatsRow& r) {
    os << std::left << std::setw(16) << r.domain << std::setw(10) << r.lang_pair << std::right << std::setw(10)
       << format_count(static_cast<double>(r.n_docs)) << std::setw(10)
       << format_count(static_cast<double>(r.n_segments)) << std::setw(10)
       << format_count(static_cast<double>(r.n_words)) << std::setw(10) << format_count(r.avg_words_per_doc())
       << '\n';
  };
  for (const auto& r : rows) line(r);
  line(total);
  return os.str();
}

}  // namespace docmt

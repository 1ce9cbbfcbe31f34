#include "docmt/curation.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "docmt/evaluation.hpp"
#include "docmt/random.hpp"
#include "docmt/text.hpp"

namespace docmt {

namespace {

void require_unit(double v, const char* name, bool allow_zero) {
  if (!std::isfinite(v) || v > 1.0 || v < 0.0 || (!allow_zero && v == 0.0))
    throw ValidationError(std::string(name) + (allow_zero ? " must be in [0, 1]" : " must be in (0, 1]"));
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("filter config: bad value for '") + key + "'");
  }
}

std::string strip_punct(std::string_view token) {
  auto cps = text::to_u32(token);
  std::size_t b = 0, e = cps.size();
  while (b < e && text::is_punct(cps[b])) ++b;
  while (e > b && text::is_punct(cps[e - 1])) --e;
  return text::to_utf8(std::u32string_view(cps).substr(b, e - b));
}

bool is_numeral(std::string_view token) {
  bool digit = false;
  for (char32_t c : text::to_u32(token)) {
    if (text::is_digit(c)) {
      digit = true;
    } else if (c != U'.' && c != U',' && c != U':' && c != U'/' && c != U'-') {
      return false;
    }
  }
  return digit;
}

std::size_t multiset_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& w : a) ++counts[w];
  std::size_t shared = 0;
  for (const auto& w : b) {
    auto it = counts.find(w);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return shared;
}

// Positions of `a` lying inside some length-n substring that also occurs in `b`.
std::size_t covered_positions(const std::u32string& a, const std::u32string& b, std::size_t n) {
  if (a.size() < n || b.size() < n) return 0;
  std::unordered_set<std::u32string_view> grams;
  std::u32string_view bv(b);
  for (std::size_t i = 0; i + n <= b.size(); ++i) grams.insert(bv.substr(i, n));
  std::u32string_view av(a);
  std::vector<bool> covered(a.size(), false);
  for (std::size_t i = 0; i + n <= a.size(); ++i) {
    if (grams.count(av.substr(i, n))) std::fill(covered.begin() + i, covered.begin() + i + n, true);
  }
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
}

std::vector<std::string> reason_names(const std::vector<DropReason>& reasons) {
  std::vector<std::string> out;
  for (auto r : reasons) out.push_back(to_string(r));
  return out;
}

}  // namespace

void FilterConfig::validate() const {
  if (min_words < 1) throw ValidationError("min_words must be >= 1");
  require_unit(identical_fraction_max, "identical_fraction_max", false);
  require_unit(doc_bad_fraction_max, "doc_bad_fraction_max", false);
  if (!(length_ratio_max >= 1.0)) throw ValidationError("length_ratio_max must be >= 1");
  require_unit(qe_segment_threshold, "qe_segment_threshold", true);
  require_unit(fluency_segment_threshold, "fluency_segment_threshold", true);
  require_unit(lid_min_confidence, "lid_min_confidence", true);
  if (copy_substring_min < 1) throw ValidationError("copy_substring_min must be >= 1");
}

void FilterConfig::apply_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("filter config must be a JSON object");
  static const std::set<std::string> known = {"min_words",          "identical_fraction_max",
                                              "length_ratio_max",   "qe_segment_threshold",
                                              "fluency_segment_threshold", "doc_bad_fraction_max",
                                              "lid_min_confidence", "copy_substring_min"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("filter config: unknown key '" + it.key() + "'");
  }
  read_field(j, "min_words", min_words);
  read_field(j, "identical_fraction_max", identical_fraction_max);
  read_field(j, "length_ratio_max", length_ratio_max);
  read_field(j, "qe_segment_threshold", qe_segment_threshold);
  read_field(j, "fluency_segment_threshold", fluency_segment_threshold);
  read_field(j, "doc_bad_fraction_max", doc_bad_fraction_max);
  read_field(j, "lid_min_confidence", lid_min_confidence);
  read_field(j, "copy_substring_min", copy_substring_min);
  validate();
}

nlohmann::ordered_json FilterConfig::to_json() const {
  nlohmann::ordered_json j;
  j["min_words"] = min_words;
  j["identical_fraction_max"] = identical_fraction_max;
  j["length_ratio_max"] = length_ratio_max;
  j["qe_segment_threshold"] = qe_segment_threshold;
  j["fluency_segment_threshold"] = fluency_segment_threshold;
  j["doc_bad_fraction_max"] = doc_bad_fraction_max;
  j["lid_min_confidence"] = lid_min_confidence;
  j["copy_substring_min"] = copy_substring_min;
  return j;
}

std::string to_string(DropReason r) {
  switch (r) {
    case DropReason::MIN_WORDS:
      return "MIN_WORDS";
    case DropReason::IDENTICAL_FRACTION:
      return "IDENTICAL_FRACTION";
    case DropReason::LENGTH_RATIO:
      return "LENGTH_RATIO";
    case DropReason::QE_BELOW:
      return "QE_BELOW";
    case DropReason::FLUENCY_BELOW:
      return "FLUENCY_BELOW";
    case DropReason::LANG_MISMATCH:
      return "LANG_MISMATCH";
    case DropReason::DUPLICATE:
      return "DUPLICATE";
  }
  return "?";
}

IdenticalFractions identical_fractions(std::string_view src, std::string_view tgt, std::size_t substring_min) {
  IdenticalFractions f;
  auto sw = text::split_whitespace(src);
  auto tw = text::split_whitespace(tgt);
  const double max_words = static_cast<double>(std::max(sw.size(), tw.size()));
  if (max_words > 0) {
    f.words = static_cast<double>(multiset_overlap(sw, tw)) / max_words;
    std::vector<std::string> sn, tn;
    for (const auto& w : sw)
      if (auto s = strip_punct(w); is_numeral(s)) sn.push_back(s);
    for (const auto& w : tw)
      if (auto s = strip_punct(w); is_numeral(s)) tn.push_back(s);
    f.numerals = static_cast<double>(multiset_overlap(sn, tn)) / max_words;
  }
  auto sc = text::to_u32(text::collapse_whitespace(src));
  auto tc = text::to_u32(text::collapse_whitespace(tgt));
  const double max_chars = static_cast<double>(std::max(sc.size(), tc.size()));
  if (max_chars > 0) {
    auto covered = std::max(covered_positions(sc, tc, substring_min), covered_positions(tc, sc, substring_min));
    f.chars = static_cast<double>(covered) / max_chars;
  }
  return f;
}

double length_ratio(std::string_view src, std::string_view tgt) {
  const auto a = text::count_words(src);
  const auto b = text::count_words(tgt);
  if (a == 0 && b == 0) return 1.0;
  if (a == 0 || b == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(std::max(a, b)) / static_cast<double>(std::min(a, b));
}

SegmentVerdict heuristic_verdict(std::string_view src, std::string_view tgt, const FilterConfig& cfg) {
  SegmentVerdict v;
  if (text::count_words(src) < cfg.min_words) v.add(DropReason::MIN_WORDS);
  auto f = identical_fractions(src, tgt, cfg.copy_substring_min);
  if (f.words > cfg.identical_fraction_max || f.numerals > cfg.identical_fraction_max ||
      f.chars > cfg.identical_fraction_max)
    v.add(DropReason::IDENTICAL_FRACTION);
  if (length_ratio(src, tgt) > cfg.length_ratio_max) v.add(DropReason::LENGTH_RATIO);
  return v;
}

SegmentVerdict heuristic_verdict(const ParallelDoc& doc, const FilterConfig& cfg) {
  return heuristic_verdict(text::join(doc.src_segments, " "), text::join(doc.tgt_segments, " "), cfg);
}

bool qe_document_filter(std::span<const double> scores, double threshold, double max_bad_fraction) {
  if (scores.empty()) throw ValidationError("qe_document_filter needs at least one score");
  const auto bad = std::count_if(scores.begin(), scores.end(), [&](double s) { return s < threshold; });
  return static_cast<double>(bad) / static_cast<double>(scores.size()) <= max_bad_fraction;
}

bool qe_document_filter(const ParallelDoc&, std::span<const double> scores, const FilterConfig& cfg) {
  return qe_document_filter(scores, cfg.qe_segment_threshold, cfg.doc_bad_fraction_max);
}

SegmentVerdict qe_verdict(const ParallelDoc& doc, ScorerClient* qe, ScorerClient* fluency, const FilterConfig& cfg) {
  SegmentVerdict v;
  if (!qe && !fluency) return v;

  std::vector<ScoreItem> items;
  std::size_t unaligned = 0;
  if (doc.src_segments.size() == doc.tgt_segments.size()) {
    for (std::size_t i = 0; i < doc.src_segments.size(); ++i)
      items.push_back({doc.src_segments[i], doc.tgt_segments[i], std::nullopt, {}});
  } else {
    auto al = align_sentences(doc.tgt_segments, doc.src_segments);
    for (const auto& l : al.links) {
      std::vector<std::string> s(doc.src_segments.begin() + l.ref_begin,
                                 doc.src_segments.begin() + l.ref_begin + l.ref_count);
      std::vector<std::string> t(doc.tgt_segments.begin() + l.hyp_begin,
                                 doc.tgt_segments.begin() + l.hyp_begin + l.hyp_count);
      items.push_back({text::join(s, " "), text::join(t, " "), std::nullopt, {}});
    }
    unaligned = al.null_hyp.size() + al.null_ref.size();
  }

  const std::size_t total = items.size() + unaligned;
  if (total == 0) return v;
  std::vector<bool> qe_bad(items.size(), false), flu_bad(items.size(), false);
  if (qe && !items.empty()) {
    auto s = qe->score_batch(items);
    if (s.size() != items.size()) throw ScorerError("QE scorer returned the wrong number of scores");
    for (std::size_t i = 0; i < s.size(); ++i) qe_bad[i] = s[i] < cfg.qe_segment_threshold;
  }
  if (fluency && !items.empty()) {
    auto s = fluency->score_batch(items);
    if (s.size() != items.size()) throw ScorerError("fluency scorer returned the wrong number of scores");
    for (std::size_t i = 0; i < s.size(); ++i) flu_bad[i] = s[i] < cfg.fluency_segment_threshold;
  }
  std::size_t bad = unaligned;
  bool any_qe = false, any_flu = false;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (qe_bad[i] || flu_bad[i]) ++bad;
    any_qe = any_qe || qe_bad[i];
    any_flu = any_flu || flu_bad[i];
  }
  if (static_cast<double>(bad) / static_cast<double>(total) > cfg.doc_bad_fraction_max) {
    if (any_qe || (unaligned > 0 && qe)) v.add(DropReason::QE_BELOW);
    if (any_flu || (unaligned > 0 && !qe)) v.add(DropReason::FLUENCY_BELOW);
  }
  return v;
}

bool language_filter(const ParallelDoc& doc, LanguageIdentifier& lid, double min_confidence) {
  auto s = lid.identify(text::join(doc.src_segments, " "));
  if (s.code != doc.src_lang.str() || s.confidence < min_confidence) return false;
  auto t = lid.identify(text::join(doc.tgt_segments, " "));
  return t.code == doc.tgt_lang.str() && t.confidence >= min_confidence;
}

std::string dedup_key(const ParallelDoc& doc) {
  auto norm = [](const std::vector<std::string>& segs) {
    return text::collapse_whitespace(text::casefold(text::nfc(text::join(segs, " "))));
  };
  std::string key = norm(doc.src_segments);
  key += '\x1f';
  key += norm(doc.tgt_segments);
  return key;
}

Corpus deduplicate(const Corpus& corpus) {
  Corpus out;
  std::unordered_set<std::string> seen;
  for (const auto& d : corpus.docs) {
    if (seen.insert(dedup_key(d)).second) out.docs.push_back(d);
  }
  return out;
}

Corpus balance_corpus(const Corpus& corpus, uint64_t seed) {
  // group (0 = from English, 1 = into English) -> pair -> doc indices
  std::array<std::map<std::string, std::vector<std::size_t>>, 2> groups;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    const auto& d = corpus.docs[i];
    const bool from_en = d.src_lang.is_english();
    const bool into_en = d.tgt_lang.is_english();
    if (from_en == into_en) throw ValidationError("doc '" + d.doc_id + "': balancing needs English on exactly one side");
    groups[from_en ? 0 : 1][d.lang_pair()].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& g : groups) {
    if (g.empty()) continue;
    std::size_t target = std::numeric_limits<std::size_t>::max();
    for (const auto& [pair, idx] : g) target = std::min(target, idx.size());
    for (const auto& [pair, idx] : g) {
      for (auto k : rng.sample_indices(idx.size(), target)) keep.push_back(idx[k]);
    }
  }
  std::sort(keep.begin(), keep.end());
  Corpus out;
  for (auto i : keep) out.docs.push_back(corpus.docs[i]);
  return out;
}

nlohmann::ordered_json DropRecord::to_json() const {
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  j["stage"] = stage;
  j["reasons"] = reasons;
  return j;
}

PipelineResult run_pipeline(const Corpus& corpus, const FilterConfig& cfg, const PipelineScorers& scorers) {
  cfg.validate();
  PipelineResult res;
  res.pre = corpus_stats(corpus);

  std::vector<ParallelDoc> stage;
  for (const auto& d : corpus.docs) {
    auto v = heuristic_verdict(d, cfg);
    if (v.keep) {
      stage.push_back(d);
    } else {
      res.log.push_back({d.doc_id, "heuristic", reason_names(v.reasons)});
    }
  }

  if (scorers.qe || scorers.fluency) {
    if (!scorers.qe) res.notices.push_back("QE scorer not configured; only fluency threshold applied");
    if (!scorers.fluency) res.notices.push_back("fluency scorer not configured; only QE threshold applied");
    std::vector<ParallelDoc> next;
    for (const auto& d : stage) {
      SegmentVerdict v;
      try {
        v = qe_verdict(d, scorers.qe, scorers.fluency, cfg);
      } catch (const std::exception& e) {
        throw PipelineAborted("scoring failed on doc '" + d.doc_id + "': " + e.what(), res.log);
      }
      if (v.keep) {
        next.push_back(d);
      } else {
        res.log.push_back({d.doc_id, "qe", reason_names(v.reasons)});
      }
    }
    stage = std::move(next);
  } else {
    res.notices.push_back("no QE or fluency scorer configured; QE stage skipped");
  }

  if (scorers.lid) {
    std::vector<ParallelDoc> next;
    for (const auto& d : stage) {
      bool keep = false;
      try {
        keep = language_filter(d, *scorers.lid, cfg.lid_min_confidence);
      } catch (const std::exception& e) {
        throw PipelineAborted("language identification failed on doc '" + d.doc_id + "': " + e.what(), res.log);
      }
      if (keep) {
        next.push_back(d);
      } else {
        res.log.push_back({d.doc_id, "language", {to_string(DropReason::LANG_MISMATCH)}});
      }
    }
    stage = std::move(next);
  } else {
    res.notices.push_back("no language identifier configured; language stage skipped");
  }

  std::unordered_set<std::string> seen;
  for (auto& d : stage) {
    if (seen.insert(dedup_key(d)).second) {
      res.corpus.docs.push_back(std::move(d));
    } else {
      res.log.push_back({d.doc_id, "dedup", {to_string(DropReason::DUPLICATE)}});
    }
  }
  res.post = corpus_stats(res.corpus);
  return res;
}

}  // namespace docmt

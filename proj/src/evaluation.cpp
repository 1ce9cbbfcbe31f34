#include "docmt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

// ---- BLEU ------------------------------------------------------------------

std::vector<std::string> bleu_tokenize(std::string_view input) {
  const std::u32string s = text::to_u32(input);
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(text::to_utf8(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (text::is_space(c)) {
      flush();
    } else if (text::is_cjk(c)) {
      flush();
      tokens.push_back(text::to_utf8(std::u32string(1, c)));
    } else if (text::is_punct(c)) {
      const bool numeric_sep = (c == U'.' || c == U',') && !current.empty() && text::is_digit(current.back()) &&
                               i + 1 < s.size() && text::is_digit(s[i + 1]);
      if (numeric_sep) {
        current.push_back(c);
      } else {
        flush();
        tokens.push_back(text::to_utf8(std::u32string(1, c)));
      }
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::string BleuScore::format_with_bp() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", score, bp);
  return buf;
}

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
  if (hyp_len == 0) return 0.0;
  if (hyp_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

BleuScore bleu_from_tokens(const std::vector<std::vector<std::string>>& hyps,
                           const std::vector<std::vector<std::string>>& refs) {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  BleuScore out;
  for (std::size_t p = 0; p < hyps.size(); ++p) {
    const auto& h = hyps[p];
    const auto& r = refs[p];
    out.hyp_len += h.size();
    out.ref_len += r.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      auto hc = count_ngrams(h, n);
      auto rc = count_ngrams(r, n);
      for (const auto& [gram, c] : hc) {
        auto it = rc.find(gram);
        if (it != rc.end()) matches[n - 1] += std::min(c, it->second);
      }
      if (h.size() >= n) totals[n - 1] += h.size() - n + 1;
    }
  }
  out.bp = brevity_penalty(out.hyp_len, out.ref_len);
  double log_sum = 0.0;
  std::size_t orders = 0;
  bool zero = out.hyp_len == 0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (totals[n] == 0) {
      out.precisions[n] = 0.0;
      continue;
    }
    out.precisions[n] = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    if (matches[n] == 0) zero = true;
    else log_sum += std::log(out.precisions[n]);
    ++orders;
  }
  // Effective order: orders with no hypothesis n-grams at all are left out of
  // the geometric mean, so identical short texts still score 100.
  if (zero || orders == 0) {
    out.score = 0.0;
  } else {
    out.score = out.bp * std::exp(log_sum / static_cast<double>(orders)) * 100.0;
  }
  return out;
}

}  // namespace

BleuScore bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.size() != ref.size())
    throw ValidationError("bleu: " + std::to_string(hyp.size()) + " hypotheses vs " + std::to_string(ref.size()) +
                          " references");
  if (hyp.empty()) throw ValidationError("bleu: no segments");
  std::vector<std::vector<std::string>> h, r;
  h.reserve(hyp.size());
  r.reserve(ref.size());
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    h.push_back(bleu_tokenize(hyp[i]));
    r.push_back(bleu_tokenize(ref[i]));
  }
  return bleu_from_tokens(h, r);
}

BleuScore d_bleu(const std::vector<std::string>& hyp_doc, const std::vector<std::string>& ref_doc) {
  return bleu({text::join(hyp_doc, " ")}, {text::join(ref_doc, " ")});
}

BleuScore d_bleu_corpus(const std::vector<std::vector<std::string>>& hyp_docs,
                        const std::vector<std::vector<std::string>>& ref_docs) {
  std::vector<std::string> h, r;
  for (const auto& d : hyp_docs) h.push_back(text::join(d, " "));
  for (const auto& d : ref_docs) r.push_back(text::join(d, " "));
  return bleu(h, r);
}

// ---- Alignment ---------------------------------------------------------------

double char_bigram_fscore(std::string_view a, std::string_view b) {
  auto bigrams = [](std::string_view s) {
    auto u = text::to_u32(s);
    std::vector<uint64_t> out;
    if (u.size() >= 2) out.reserve(u.size() - 1);
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
      out.push_back((static_cast<uint64_t>(u[i]) << 32) | static_cast<uint64_t>(u[i + 1]));
    std::sort(out.begin(), out.end());
    return out;
  };
  auto ba = bigrams(a);
  auto bb = bigrams(b);
  if (ba.empty() && bb.empty()) return a == b ? 1.0 : 0.0;
  if (ba.empty() || bb.empty()) return 0.0;
  std::size_t overlap = 0;
  std::size_t i = 0, j = 0;
  while (i < ba.size() && j < bb.size()) {
    if (ba[i] == bb[j]) {
      ++overlap;
      ++i;
      ++j;
    } else if (ba[i] < bb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(ba.size() + bb.size());
}

double Alignment::total_similarity() const {
  double total = 0.0;
  for (const auto& l : links) total += l.similarity;
  return total;
}

namespace {

struct Move {
  std::size_t hyp_begin, hyp_count, ref_begin, ref_count;
  double sim;
};

std::vector<Move> align_moves(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                              const Similarity& sim) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // Move kinds in tie-break preference order.
  enum Kind : uint8_t { k11, k12, k21, kNullHyp, kNullRef, kNone };
  std::vector<double> best((n + 1) * (m + 1), kNegInf);
  std::vector<uint8_t> from((n + 1) * (m + 1), kNone);
  std::vector<double> link_sim((n + 1) * (m + 1) * 3, 0.0);
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  best[at(0, 0)] = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      double b = kNegInf;
      uint8_t kind = kNone;
      auto consider = [&](double prev, double gain, uint8_t k) {
        if (prev == kNegInf) return;
        double v = prev + gain;
        if (v > b) {
          b = v;
          kind = k;
        }
      };
      if (i >= 1 && j >= 1) {
        double s = sim(hyp[i - 1], ref[j - 1]);
        link_sim[at(i, j) * 3 + 0] = s;
        consider(best[at(i - 1, j - 1)], s, k11);
      }
      if (i >= 1 && j >= 2) {
        double s = sim(hyp[i - 1], ref[j - 2] + " " + ref[j - 1]);
        link_sim[at(i, j) * 3 + 1] = s;
        consider(best[at(i - 1, j - 2)], s, k12);
      }
      if (i >= 2 && j >= 1) {
        double s = sim(hyp[i - 2] + " " + hyp[i - 1], ref[j - 1]);
        link_sim[at(i, j) * 3 + 2] = s;
        consider(best[at(i - 2, j - 1)], s, k21);
      }
      if (i >= 1) consider(best[at(i - 1, j)], 0.0, kNullHyp);
      if (j >= 1) consider(best[at(i, j - 1)], 0.0, kNullRef);
      best[at(i, j)] = b;
      from[at(i, j)] = kind;
    }
  }
  std::vector<Move> moves;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    switch (from[at(i, j)]) {
      case k11:
        moves.push_back({i - 1, 1, j - 1, 1, link_sim[at(i, j) * 3 + 0]});
        i -= 1;
        j -= 1;
        break;
      case k12:
        moves.push_back({i - 1, 1, j - 2, 2, link_sim[at(i, j) * 3 + 1]});
        i -= 1;
        j -= 2;
        break;
      case k21:
        moves.push_back({i - 2, 2, j - 1, 1, link_sim[at(i, j) * 3 + 2]});
        i -= 2;
        j -= 1;
        break;
      case kNullHyp:
        moves.push_back({i - 1, 1, j, 0, 0.0});
        i -= 1;
        break;
      case kNullRef:
        moves.push_back({i, 0, j - 1, 1, 0.0});
        j -= 1;
        break;
      default:
        throw Error("alignment backtrack failed");
    }
  }
  std::reverse(moves.begin(), moves.end());
  return moves;
}

}  // namespace

Alignment align_sentences(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                          const Similarity& sim) {
  Alignment out;
  for (const auto& mv : align_moves(hyp, ref, sim)) {
    if (mv.hyp_count == 0) {
      out.null_ref.push_back(mv.ref_begin);
    } else if (mv.ref_count == 0) {
      out.null_hyp.push_back(mv.hyp_begin);
    } else {
      out.links.push_back({mv.hyp_begin, mv.hyp_count, mv.ref_begin, mv.ref_count, mv.sim});
    }
  }
  return out;
}

std::vector<SentencePair> aligned_triples(const std::vector<std::string>& src, const std::vector<std::string>& hyp,
                                          const std::vector<std::string>& ref, const Similarity& sim) {
  const bool src_parallel = src.size() == ref.size();
  auto slice = [](const std::vector<std::string>& v, std::size_t b, std::size_t c) {
    std::vector<std::string> part(v.begin() + static_cast<std::ptrdiff_t>(b),
                                  v.begin() + static_cast<std::ptrdiff_t>(b + c));
    return text::join(part, " ");
  };
  std::vector<SentencePair> out;
  for (const auto& mv : align_moves(hyp, ref, sim)) {
    SentencePair p;
    p.hyp = slice(hyp, mv.hyp_begin, mv.hyp_count);
    p.ref = slice(ref, mv.ref_begin, mv.ref_count);
    if (src_parallel) p.src = slice(src, mv.ref_begin, mv.ref_count);
    out.push_back(std::move(p));
  }
  return out;
}

// ---- LTCR --------------------------------------------------------------------

std::vector<std::optional<std::string>> CharOverlapAligner::align(const std::vector<std::string>& src_tokens,
                                                                  const std::vector<std::string>& tgt_tokens) {
  std::vector<std::u32string> tgt;
  tgt.reserve(tgt_tokens.size());
  for (const auto& t : tgt_tokens) {
    auto u = text::to_u32(t);
    std::sort(u.begin(), u.end());
    tgt.push_back(std::move(u));
  }
  std::vector<std::optional<std::string>> out;
  out.reserve(src_tokens.size());
  for (const auto& s : src_tokens) {
    auto su = text::to_u32(s);
    std::sort(su.begin(), su.end());
    std::size_t best = 0;
    std::optional<std::size_t> best_idx;
    for (std::size_t k = 0; k < tgt.size(); ++k) {
      std::u32string common;
      std::set_intersection(su.begin(), su.end(), tgt[k].begin(), tgt[k].end(), std::back_inserter(common));
      if (common.size() > best) {
        best = common.size();
        best_idx = k;
      }
    }
    out.push_back(best_idx ? std::optional<std::string>(tgt_tokens[*best_idx]) : std::nullopt);
  }
  return out;
}

std::set<std::string, std::less<>> LtcrOptions::default_ltcr_stoplist() {
  return {"about", "also",  "been",  "being", "both",  "could", "does",  "each",  "from",  "have",  "here",
          "into",  "just",  "like",  "more",  "most",  "much",  "must",  "only",  "other", "over",  "same",
          "should", "some", "such",  "than",  "that",  "their", "them",  "then",  "there", "these", "they",
          "this",  "those", "through", "very", "want", "were",  "what",  "when",  "where", "which", "while",
          "will",  "with",  "would", "your",  "because", "after", "before", "again", "going", "really"};
}

std::vector<std::string> ltcr_tokenize(std::string_view input) {
  const std::u32string s = text::to_u32(text::casefold(input));
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : s) {
    if (text::is_alpha(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(text::to_utf8(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(text::to_utf8(cur));
  return out;
}

LtcrResult ltcr(const std::vector<std::vector<SentencePair>>& docs, WordAligner& aligner,
                const LtcrOptions& options) {
  if (options.min_repeat < 2) throw ValidationError("ltcr: min_repeat must be >= 2");
  LtcrResult result;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    std::vector<std::vector<std::string>> src_toks, tgt_toks;
    std::map<std::string, std::size_t> freq;
    for (const auto& pair : doc) {
      src_toks.push_back(ltcr_tokenize(pair.src));
      tgt_toks.push_back(ltcr_tokenize(pair.hyp));
      for (const auto& t : src_toks.back()) {
        if (text::length_u32(t) >= options.min_term_length && !options.stoplist.contains(t)) ++freq[t];
      }
    }
    std::map<std::string, std::vector<std::string>> translations;
    for (const auto& [term, count] : freq) {
      if (count >= options.min_repeat) translations[term];
    }
    if (translations.empty()) continue;
    for (std::size_t s = 0; s < doc.size(); ++s) {
      std::vector<std::size_t> positions;
      for (std::size_t k = 0; k < src_toks[s].size(); ++k) {
        if (translations.contains(src_toks[s][k])) positions.push_back(k);
      }
      if (positions.empty()) continue;
      std::vector<std::optional<std::string>> aligned;
      try {
        aligned = aligner.align(src_toks[s], tgt_toks[s]);
        if (aligned.size() != src_toks[s].size()) throw ScorerError("aligner returned wrong length");
      } catch (const std::exception&) {
        result.skipped_occurrences += positions.size();
        continue;
      }
      for (std::size_t k : positions) {
        if (!aligned[k]) {
          ++result.skipped_occurrences;
          continue;
        }
        translations[src_toks[s][k]].push_back(text::casefold(*aligned[k]));
      }
    }
    for (const auto& [term, trs] : translations) {
      LtcrTerm t;
      t.doc_index = d;
      t.term = term;
      t.occurrences = freq[term];
      const std::size_t k = trs.size();
      t.total_pairs = k < 2 ? 0 : k * (k - 1) / 2;
      std::map<std::string, std::size_t> groups;
      for (const auto& tr : trs) ++groups[tr];
      for (const auto& [_, g] : groups) t.consistent_pairs += g * (g - 1) / 2;
      result.consistent_pairs += t.consistent_pairs;
      result.total_pairs += t.total_pairs;
      result.terms.push_back(std::move(t));
    }
  }
  if (result.total_pairs > 0)
    result.ratio = static_cast<double>(result.consistent_pairs) / static_cast<double>(result.total_pairs);
  return result;
}

// ---- SLIDE ---------------------------------------------------------------------

std::vector<SlideUnitWindow> slide_windows(const std::vector<std::size_t>& unit_lengths,
                                           const SlideOptions& options) {
  if (options.stride < 1 || options.window < options.stride)
    throw ValidationError("slide: require window >= stride >= 1");
  std::vector<std::size_t> begin(unit_lengths.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < unit_lengths.size(); ++i) {
    begin[i] = total;
    total += unit_lengths[i];
  }
  std::vector<std::size_t> starts;
  if (total <= options.window) {
    starts.push_back(0);
  } else {
    for (std::size_t s = 0; s + options.window < total; s += options.stride) starts.push_back(s);
    starts.push_back(total - options.window);
  }
  std::vector<SlideUnitWindow> windows;
  for (std::size_t s : starts) {
    SlideUnitWindow w{s, {}};
    const std::size_t end = s + options.window;
    for (std::size_t i = 0; i < unit_lengths.size(); ++i) {
      if (begin[i] >= s && begin[i] + unit_lengths[i] <= end) w.units.push_back(i);
    }
    if (w.units.empty()) {
      for (std::size_t i = 0; i < unit_lengths.size(); ++i) {
        if (begin[i] <= s && s < begin[i] + unit_lengths[i]) {
          w.units.push_back(i);
          break;
        }
      }
    }
    if (w.units.empty()) continue;
    if (!windows.empty() && windows.back().units == w.units) continue;
    windows.push_back(std::move(w));
  }
  return windows;
}

double slide_score(const std::vector<SentencePair>& stream, ChunkScorer& scorer, const TokenCounter& counter,
                   const SlideOptions& options) {
  if (stream.empty()) throw ValidationError("slide: empty document");
  std::vector<std::size_t> lengths;
  lengths.reserve(stream.size());
  for (const auto& u : stream)
    lengths.push_back(std::max({counter.count(u.src), counter.count(u.hyp), counter.count(u.ref)}));
  const auto windows = slide_windows(lengths, options);
  double sum = 0.0;
  for (const auto& w : windows) {
    SlideWindow sw;
    std::vector<std::string> src, hyp, ref;
    for (std::size_t i : w.units) {
      if (!stream[i].src.empty()) src.push_back(stream[i].src);
      if (!stream[i].hyp.empty()) hyp.push_back(stream[i].hyp);
      if (!stream[i].ref.empty()) ref.push_back(stream[i].ref);
      sw.tokens += lengths[i];
    }
    sw.src = text::join(src, " ");
    sw.hyp = text::join(hyp, " ");
    sw.ref = text::join(ref, " ");
    double v = scorer.score(sw);
    if (!std::isfinite(v)) throw ScorerError("slide: window scorer returned a non-finite value");
    sum += v;
  }
  return sum / static_cast<double>(windows.size());
}

double slide_score(const std::vector<std::string>& hyp_doc, const std::vector<std::string>& ref_doc,
                   const std::vector<std::string>& src_doc, ChunkScorer& scorer, const TokenCounter& counter,
                   const SlideOptions& options) {
  if (hyp_doc.empty() || ref_doc.empty()) throw ValidationError("slide: empty document");
  return slide_score(aligned_triples(src_doc, hyp_doc, ref_doc), scorer, counter, options);
}

}  // namespace docmt

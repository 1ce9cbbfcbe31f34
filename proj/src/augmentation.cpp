#include "docmt/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "docmt/error.hpp"
#include "docmt/evaluation.hpp"
#include "docmt/random.hpp"
#include "docmt/text.hpp"

namespace docmt {

void ChunkingSpec::validate() const {
  if (size < 1) throw ValidationError("chunk size must be >= 1");
}

std::string to_string(ChunkingSpec::Unit unit) {
  return unit == ChunkingSpec::Unit::segments ? "segments" : "tokens";
}

ChunkingSpec::Unit chunk_unit_from_string(std::string_view s) {
  if (s == "segments") return ChunkingSpec::Unit::segments;
  if (s == "tokens") return ChunkingSpec::Unit::tokens;
  throw ValidationError("unknown chunk unit '" + std::string(s) + "'");
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(const std::vector<std::string>& items,
                                                              const ChunkingSpec& spec,
                                                              const TokenCounter& counter) {
  spec.validate();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (spec.unit == ChunkingSpec::Unit::segments) {
    for (std::size_t b = 0; b < items.size(); b += spec.size)
      out.emplace_back(b, std::min(spec.size, items.size() - b));
    return out;
  }
  std::size_t begin = 0, count = 0, tokens = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t t = counter.count(items[i]);
    if (count > 0 && tokens + t > spec.size) {
      out.emplace_back(begin, count);
      begin = i;
      count = 0;
      tokens = 0;
    }
    ++count;
    tokens += t;
  }
  if (count > 0) out.emplace_back(begin, count);
  return out;
}

std::vector<std::string> chunk_texts(const std::vector<std::string>& segments, const ChunkingSpec& spec,
                                     const TokenCounter& counter) {
  std::vector<std::string> out;
  for (auto [b, c] : chunk_ranges(segments, spec, counter)) {
    std::vector<std::string> part(segments.begin() + static_cast<std::ptrdiff_t>(b),
                                  segments.begin() + static_cast<std::ptrdiff_t>(b + c));
    out.push_back(text::join(part, std::string(1, kRecordSeparator)));
  }
  return out;
}

nlohmann::ordered_json ContextualExample::to_json() const {
  nlohmann::ordered_json j;
  j["src_lang"] = src_lang.str();
  j["tgt_lang"] = tgt_lang.str();
  j["context"] = nlohmann::ordered_json::array();
  for (const auto& p : context) j["context"].push_back({{"src", p.src}, {"tgt", p.tgt}});
  j["source"] = source;
  if (target) j["target"] = *target;
  return j;
}

ContextualExample ContextualExample::from_json(const nlohmann::json& j) {
  try {
    ContextualExample ex;
    ex.src_lang = LangCode::parse(j.at("src_lang").get<std::string>());
    ex.tgt_lang = LangCode::parse(j.at("tgt_lang").get<std::string>());
    for (const auto& p : j.at("context")) ex.context.push_back({p.at("src").get<std::string>(), p.at("tgt").get<std::string>()});
    ex.source = j.at("source").get<std::string>();
    if (auto it = j.find("target"); it != j.end() && !it->is_null()) ex.target = it->get<std::string>();
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed contextual example: ") + e.what());
  }
}

std::vector<ParallelDoc> mrd2d_split(const ParallelDoc& doc, std::size_t k, const std::set<std::size_t>& allowed) {
  if (!allowed.contains(k)) throw ValidationError("mrd2d: k=" + std::to_string(k) + " not in the configured set");
  if (doc.src_segments.empty() || doc.tgt_segments.empty())
    throw ValidationError("mrd2d: doc '" + doc.doc_id + "' is empty");
  if (k == 1) return {doc};
  const std::size_t s = doc.src_segments.size();
  const std::size_t t = doc.tgt_segments.size();
  const std::size_t m = std::min({k, s, t});
  auto cut = [m](std::size_t i, std::size_t total) { return (i * total + m - 1) / m; };
  std::vector<ParallelDoc> parts;
  parts.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    ParallelDoc part;
    part.doc_id = doc.doc_id + "#k" + std::to_string(k) + "p" + std::to_string(i);
    part.src_lang = doc.src_lang;
    part.tgt_lang = doc.tgt_lang;
    part.domain = doc.domain;
    part.meta = doc.meta;
    part.meta["mrd2d_parent"] = doc.doc_id;
    part.src_segments.assign(doc.src_segments.begin() + static_cast<std::ptrdiff_t>(cut(i, s)),
                             doc.src_segments.begin() + static_cast<std::ptrdiff_t>(cut(i + 1, s)));
    part.tgt_segments.assign(doc.tgt_segments.begin() + static_cast<std::ptrdiff_t>(cut(i, t)),
                             doc.tgt_segments.begin() + static_cast<std::ptrdiff_t>(cut(i + 1, t)));
    parts.push_back(std::move(part));
  }
  return parts;
}

std::vector<ContextPair> aligned_segment_pairs(const ParallelDoc& doc) {
  std::vector<ContextPair> pairs;
  if (doc.src_segments.size() == doc.tgt_segments.size()) {
    for (std::size_t i = 0; i < doc.src_segments.size(); ++i)
      pairs.push_back({doc.src_segments[i], doc.tgt_segments[i]});
    return pairs;
  }
  Alignment al = align_sentences(doc.src_segments, doc.tgt_segments);
  if (!al.null_hyp.empty() || !al.null_ref.empty())
    throw ValidationError("doc '" + doc.doc_id + "' cannot be aligned at segment level");
  auto slice = [](const std::vector<std::string>& v, std::size_t b, std::size_t c) {
    return c == 1 ? v[b] : v[b] + " " + v[b + 1];
  };
  for (const auto& l : al.links)
    pairs.push_back({slice(doc.src_segments, l.hyp_begin, l.hyp_count), slice(doc.tgt_segments, l.ref_begin, l.ref_count)});
  return pairs;
}

std::vector<ContextualExample> build_capt_examples(const ParallelDoc& doc, const ChunkingSpec& spec, std::size_t n,
                                                   const TokenCounter& counter) {
  const auto pairs = aligned_segment_pairs(doc);
  std::vector<std::string> sources;
  sources.reserve(pairs.size());
  for (const auto& p : pairs) sources.push_back(p.src);
  const std::string sep(1, kRecordSeparator);
  std::vector<ContextPair> chunks;
  for (auto [b, c] : chunk_ranges(sources, spec, counter)) {
    ContextPair chunk;
    for (std::size_t i = b; i < b + c; ++i) {
      if (i > b) {
        chunk.src += sep;
        chunk.tgt += sep;
      }
      chunk.src += pairs[i].src;
      chunk.tgt += pairs[i].tgt;
    }
    chunks.push_back(std::move(chunk));
  }
  std::vector<ContextualExample> out;
  out.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ContextualExample ex;
    ex.src_lang = doc.src_lang;
    ex.tgt_lang = doc.tgt_lang;
    for (std::size_t j = i > n ? i - n : 0; j < i; ++j) ex.context.push_back(chunks[j]);
    ex.source = chunks[i].src;
    ex.target = chunks[i].tgt;
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

ParallelDoc merge_group(const std::vector<const ParallelDoc*>& group) {
  if (group.size() == 1) return *group.front();
  ParallelDoc merged;
  const ParallelDoc& first = *group.front();
  merged.src_lang = first.src_lang;
  merged.tgt_lang = first.tgt_lang;
  merged.domain = first.domain;
  merged.meta = first.meta;
  std::vector<std::string> ids;
  for (const ParallelDoc* d : group) {
    ids.push_back(d->doc_id);
    merged.src_segments.insert(merged.src_segments.end(), d->src_segments.begin(), d->src_segments.end());
    merged.tgt_segments.insert(merged.tgt_segments.end(), d->tgt_segments.begin(), d->tgt_segments.end());
  }
  merged.doc_id = text::join(ids, "+");
  merged.meta["merged_docs"] = std::to_string(group.size());
  return merged;
}

}  // namespace

ConcatResult concat_to_budget(const std::vector<ParallelDoc>& docs, std::size_t budget, const TokenCounter& counter) {
  ConcatResult result;
  std::vector<const ParallelDoc*> group;
  std::size_t group_tokens = 0;
  auto flush = [&] {
    if (!group.empty()) result.docs.push_back(merge_group(group));
    group.clear();
    group_tokens = 0;
  };
  auto same_key = [](const ParallelDoc& a, const ParallelDoc& b) {
    return a.src_lang == b.src_lang && a.tgt_lang == b.tgt_lang && a.domain == b.domain;
  };
  for (const auto& doc : docs) {
    const std::size_t tokens =
        counter.count(text::join(doc.src_segments, " ")) + counter.count(text::join(doc.tgt_segments, " "));
    if (tokens > budget) {
      flush();
      result.docs.push_back(doc);
      result.warnings.push_back("doc '" + doc.doc_id + "' has " + std::to_string(tokens) +
                                " tokens, above the budget of " + std::to_string(budget) + "; passed through alone");
      continue;
    }
    if (!group.empty() && same_key(*group.front(), doc) && group_tokens + tokens <= budget) {
      group.push_back(&doc);
      group_tokens += tokens;
      continue;
    }
    flush();
    group.push_back(&doc);
    group_tokens = tokens;
  }
  flush();
  return result;
}

MixResult mix_corpora(const Corpus& doc_corpus, const Corpus& sent_corpus, double sentence_fraction, uint64_t seed) {
  if (!(sentence_fraction >= 0.0 && sentence_fraction <= 1.0))
    throw ValidationError("sentence fraction must lie in [0, 1]");
  MixResult result;
  std::size_t wanted = 0;
  if (sentence_fraction >= 1.0) {
    wanted = sent_corpus.size();
    if (!doc_corpus.empty()) result.warnings.push_back("sentence fraction 1.0 keeps every sentence record");
  } else if (sentence_fraction > 0.0) {
    wanted = static_cast<std::size_t>(
        std::llround(sentence_fraction * static_cast<double>(doc_corpus.size()) / (1.0 - sentence_fraction)));
  }
  if (wanted > sent_corpus.size()) {
    result.warnings.push_back("sentence corpus has " + std::to_string(sent_corpus.size()) + " records, " +
                              std::to_string(wanted) + " requested; using all");
    wanted = sent_corpus.size();
  }

  std::map<std::string, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < sent_corpus.docs.size(); ++i) by_pair[sent_corpus.docs[i].lang_pair()].push_back(i);

  // Even quota per pair, leftovers handed to pairs with spare records.
  std::map<std::string, std::size_t> quota;
  std::size_t remaining = wanted;
  while (remaining > 0) {
    std::vector<std::string> open;
    for (const auto& [pair, idx] : by_pair)
      if (quota[pair] < idx.size()) open.push_back(pair);
    if (open.empty()) break;
    const std::size_t share = std::max<std::size_t>(1, remaining / open.size());
    for (const auto& pair : open) {
      if (remaining == 0) break;
      const std::size_t take = std::min({share, by_pair[pair].size() - quota[pair], remaining});
      quota[pair] += take;
      remaining -= take;
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (const auto& [pair, idx] : by_pair) {
    for (std::size_t k : rng.sample_indices(idx.size(), quota[pair])) chosen.push_back(idx[k]);
  }
  std::sort(chosen.begin(), chosen.end());

  std::set<std::string, std::less<>> ids;
  for (const auto& d : doc_corpus.docs) ids.insert(d.doc_id);
  result.corpus.docs = doc_corpus.docs;
  for (std::size_t i : chosen) {
    const auto& d = sent_corpus.docs[i];
    if (!ids.insert(d.doc_id).second)
      throw ValidationError("mix: doc_id '" + d.doc_id + "' appears in both corpora");
    result.corpus.docs.push_back(d);
  }
  result.sentence_records = chosen.size();
  rng.shuffle(result.corpus.docs);
  return result;
}

const AugmentConfig::CorpusFlags& AugmentConfig::flags_for(const std::string& domain) const {
  auto it = per_corpus.find(domain);
  return it == per_corpus.end() ? defaults : it->second;
}

void AugmentConfig::apply_json(const nlohmann::json& j) {
  try {
    if (j.contains("mrd2d_ks")) mrd2d_ks = j.at("mrd2d_ks").get<std::vector<std::size_t>>();
    if (j.contains("capt_window")) capt_window = j.at("capt_window").get<std::size_t>();
    if (j.contains("token_budget")) token_budget = j.at("token_budget").get<std::size_t>();
    if (j.contains("sentence_fraction")) sentence_fraction = j.at("sentence_fraction").get<double>();
    if (j.contains("capt_chunk_unit")) capt_chunking.unit = chunk_unit_from_string(j.at("capt_chunk_unit").get<std::string>());
    if (j.contains("capt_chunk_size")) capt_chunking.size = j.at("capt_chunk_size").get<std::size_t>();
    if (j.contains("per_corpus")) {
      for (const auto& [domain, flags] : j.at("per_corpus").items()) {
        CorpusFlags f = defaults;
        if (flags.contains("mrd2d")) f.mrd2d = flags.at("mrd2d").get<bool>();
        if (flags.contains("capt")) f.capt = flags.at("capt").get<bool>();
        per_corpus[domain] = f;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("augmentation config: ") + e.what());
  }
  capt_chunking.validate();
  if (!(sentence_fraction >= 0.0 && sentence_fraction <= 1.0))
    throw ValidationError("augmentation config: sentence_fraction must lie in [0, 1]");
}

nlohmann::ordered_json AugmentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mrd2d_ks"] = mrd2d_ks;
  j["capt_window"] = capt_window;
  j["token_budget"] = token_budget;
  j["sentence_fraction"] = sentence_fraction;
  j["capt_chunk_unit"] = to_string(capt_chunking.unit);
  j["capt_chunk_size"] = capt_chunking.size;
  nlohmann::ordered_json pc = nlohmann::ordered_json::object();
  for (const auto& [domain, f] : per_corpus) pc[domain] = {{"mrd2d", f.mrd2d}, {"capt", f.capt}};
  j["per_corpus"] = pc;
  return j;
}

AugmentResult augment_corpus(const Corpus& input, const AugmentConfig& cfg, const Corpus* sentences, uint64_t seed,
                             const TokenCounter& counter) {
  AugmentResult result;
  auto concat = concat_to_budget(input.docs, cfg.token_budget, counter);
  result.warnings = std::move(concat.warnings);
  const std::set<std::size_t> allowed(cfg.mrd2d_ks.begin(), cfg.mrd2d_ks.end());
  Corpus augmented;
  for (const auto& doc : concat.docs) {
    const auto& flags = cfg.flags_for(doc.domain);
    if (flags.mrd2d && !cfg.mrd2d_ks.empty()) {
      for (std::size_t k : cfg.mrd2d_ks) {
        auto parts = mrd2d_split(doc, k, allowed);
        augmented.docs.insert(augmented.docs.end(), parts.begin(), parts.end());
      }
    } else {
      augmented.docs.push_back(doc);
    }
    if (flags.capt) {
      try {
        auto examples = build_capt_examples(doc, cfg.capt_chunking, cfg.capt_window, counter);
        result.capt_examples.insert(result.capt_examples.end(), examples.begin(), examples.end());
      } catch (const ValidationError& e) {
        result.warnings.push_back(std::string("capt skipped: ") + e.what());
      }
    }
  }
  if (sentences != nullptr && cfg.sentence_fraction > 0.0) {
    auto mixed = mix_corpora(augmented, *sentences, cfg.sentence_fraction, seed);
    result.warnings.insert(result.warnings.end(), mixed.warnings.begin(), mixed.warnings.end());
    result.corpus = std::move(mixed.corpus);
  } else {
    result.corpus = std::move(augmented);
  }
  return result;
}

}  // namespace docmt

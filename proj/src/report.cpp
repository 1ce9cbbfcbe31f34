#include "docmt/report.hpp"

#include <cstdio>
#include <map>

#include "docmt/text.hpp"

namespace docmt {

namespace {

struct DocPieces {
  std::string doc_id;
  std::vector<std::string> hyp;
  std::vector<std::string> ref;
  std::vector<SentencePair> triples;
  std::vector<double> sentence_scores;
  std::optional<double> window_score;
};

DocPieces score_pieces(const std::string& doc_id, const std::vector<std::string>& hyp, const ParallelDoc& ref,
                       const EvalScorers& scorers) {
  if (hyp.empty()) throw ValidationError("doc '" + doc_id + "': empty hypothesis");
  DocPieces p;
  p.doc_id = doc_id;
  p.hyp = hyp;
  p.ref = ref.tgt_segments;
  p.triples = aligned_triples(ref.src_segments, hyp, ref.tgt_segments);
  if (scorers.sentence_metric) {
    std::vector<ScoreItem> items;
    for (const auto& t : p.triples) {
      if (t.hyp.empty() || t.ref.empty()) continue;
      items.push_back({t.src, t.hyp, t.ref, {}});
    }
    if (!items.empty()) p.sentence_scores = scorers.sentence_metric->score_batch(items);
  }
  if (scorers.window_metric)
    p.window_score = slide_score(hyp, ref.tgt_segments, ref.src_segments, *scorers.window_metric,
                                 default_token_counter(), scorers.slide);
  return p;
}

std::vector<std::string> column(const std::vector<SentencePair>& triples, std::string SentencePair::*field) {
  std::vector<std::string> out;
  for (const auto& t : triples) out.push_back(t.*field);
  return out;
}

LtcrResult run_ltcr(const std::vector<const DocPieces*>& docs, const EvalScorers& scorers) {
  std::vector<std::vector<SentencePair>> pairs;
  for (const auto* d : docs) pairs.push_back(d->triples);
  CharOverlapAligner fallback;
  WordAligner& aligner = scorers.word_aligner ? *scorers.word_aligner : fallback;
  return ltcr(pairs, aligner, scorers.ltcr);
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

void add_notices(EvalReport& r, const EvalScorers& scorers) {
  if (!scorers.sentence_metric) r.notices.push_back("no sentence metric configured; COMET column absent");
  if (!scorers.window_metric) r.notices.push_back("no window metric configured; d-COMET column absent");
}

EvalReport doc_report(const DocPieces& p, const EvalScorers& scorers) {
  EvalReport r;
  r.label = p.doc_id;
  r.n_docs = 1;
  r.n_sentences = p.triples.size();
  r.bleu = bleu(column(p.triples, &SentencePair::hyp), column(p.triples, &SentencePair::ref));
  if (!p.sentence_scores.empty()) r.comet = mean(p.sentence_scores);
  r.d_bleu = d_bleu(p.hyp, p.ref);
  r.d_comet = p.window_score;
  r.ltcr = run_ltcr({&p}, scorers);
  add_notices(r, scorers);
  return r;
}

std::string pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

nlohmann::ordered_json bleu_json(const BleuScore& b) {
  nlohmann::ordered_json j;
  j["score"] = b.score;
  j["bp"] = b.bp;
  j["precisions"] = b.precisions;
  j["hyp_len"] = b.hyp_len;
  j["ref_len"] = b.ref_len;
  return j;
}

}  // namespace

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["n_docs"] = n_docs;
  j["n_sentences"] = n_sentences;
  j["bleu"] = bleu_json(bleu);
  j["comet"] = comet ? nlohmann::ordered_json(*comet) : nlohmann::ordered_json(nullptr);
  j["d_bleu"] = bleu_json(d_bleu);
  j["d_comet"] = d_comet ? nlohmann::ordered_json(*d_comet) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json l;
  l["ratio"] = ltcr.ratio ? nlohmann::ordered_json(*ltcr.ratio) : nlohmann::ordered_json(nullptr);
  l["consistent_pairs"] = ltcr.consistent_pairs;
  l["total_pairs"] = ltcr.total_pairs;
  l["skipped_occurrences"] = ltcr.skipped_occurrences;
  j["ltcr"] = l;
  j["throughput"] = throughput ? nlohmann::ordered_json(*throughput) : nlohmann::ordered_json(nullptr);
  j["notices"] = notices;
  return j;
}

std::string EvalReport::table_header() { return "| System | BLEU | COMET | d-BLEU (BP) | d-COMET | LTCR |"; }

std::string EvalReport::table_row() const {
  return "| " + label + " | " + fixed2(bleu.score) + " | " + pct(comet) + " | " + d_bleu.format_with_bp() + " | " +
         pct(d_comet) + " | " + pct(ltcr.ratio) + " |";
}

EvalReport evaluate_document(const std::string& doc_id, const std::vector<std::string>& hyp, const ParallelDoc& ref,
                             const EvalScorers& scorers) {
  return doc_report(score_pieces(doc_id, hyp, ref, scorers), scorers);
}

EvalReport evaluate(const TranslationRun& run, const ParallelDoc& ref, const EvalScorers& scorers) {
  if (run.doc_id != ref.doc_id)
    throw ValidationError("run doc_id '" + run.doc_id + "' does not match reference doc_id '" + ref.doc_id + "'");
  EvalReport r = evaluate_document(run.doc_id, text::split(run.merged, kChunkJoiner), ref, scorers);
  r.throughput = run.throughput;
  return r;
}

nlohmann::ordered_json CorpusEvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total.to_json();
  j["documents"] = nlohmann::ordered_json::array();
  for (const auto& d : documents) j["documents"].push_back(d.to_json());
  return j;
}

std::string CorpusEvalReport::to_table() const {
  std::string out = EvalReport::table_header() + "\n|---|---|---|---|---|---|\n";
  for (const auto& d : documents) out += d.table_row() + "\n";
  out += total.table_row() + "\n";
  return out;
}

CorpusEvalReport evaluate_corpus(const std::vector<TranslationRun>& runs, const Corpus& refs,
                                 const EvalScorers& scorers) {
  if (runs.empty()) throw ValidationError("no runs to evaluate");
  std::map<std::string, const ParallelDoc*> by_id;
  for (const auto& d : refs.docs) by_id[d.doc_id] = &d;

  CorpusEvalReport out;
  std::vector<DocPieces> pieces;
  std::size_t tokens = 0;
  double seconds = 0.0;
  for (const auto& run : runs) {
    auto it = by_id.find(run.doc_id);
    if (it == by_id.end()) throw ValidationError("no reference document for run doc_id '" + run.doc_id + "'");
    pieces.push_back(score_pieces(run.doc_id, text::split(run.merged, kChunkJoiner), *it->second, scorers));
    out.documents.push_back(doc_report(pieces.back(), scorers));
    out.documents.back().throughput = run.throughput;
    tokens += run.tokens_in + run.tokens_out;
    seconds += run.wall_seconds;
  }

  EvalReport& t = out.total;
  t.label = "corpus";
  t.n_docs = pieces.size();
  std::vector<std::string> hyp, ref;
  std::vector<std::vector<std::string>> hyp_docs, ref_docs;
  std::vector<double> sentence_scores, window_scores;
  std::vector<const DocPieces*> ptrs;
  for (const auto& p : pieces) {
    for (const auto& s : p.triples) {
      hyp.push_back(s.hyp);
      ref.push_back(s.ref);
    }
    hyp_docs.push_back(p.hyp);
    ref_docs.push_back(p.ref);
    sentence_scores.insert(sentence_scores.end(), p.sentence_scores.begin(), p.sentence_scores.end());
    if (p.window_score) window_scores.push_back(*p.window_score);
    ptrs.push_back(&p);
  }
  t.n_sentences = hyp.size();
  t.bleu = bleu(hyp, ref);
  t.d_bleu = d_bleu_corpus(hyp_docs, ref_docs);
  if (!sentence_scores.empty()) t.comet = mean(sentence_scores);
  if (!window_scores.empty()) t.d_comet = mean(window_scores);
  t.ltcr = run_ltcr(ptrs, scorers);
  if (seconds > 0.0) t.throughput = static_cast<double>(tokens) / seconds;
  add_notices(t, scorers);
  return out;
}

}  // namespace docmt

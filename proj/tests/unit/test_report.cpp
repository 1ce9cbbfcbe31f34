#include <doctest.h>

#include "docmt/report.hpp"
#include "../support/gen.hpp"

using namespace docmt;

namespace {

ParallelDoc ref_doc(const std::string& id) {
  return testgen::make_doc(id, {"der Hafen ist alt", "der Hafen ist groß", "wir sehen den Hafen"},
                           {"the harbor is old", "the harbor is big", "we see the harbor"}, "de", "en");
}

TranslationRun run_for(const ParallelDoc& d, std::vector<std::string> outputs) {
  TranslationRun r;
  r.doc_id = d.doc_id;
  r.sources = d.src_segments;
  r.outputs = std::move(outputs);
  r.tokens_in = 12;
  r.tokens_out = 12;
  r.wall_seconds = 2.0;
  r.finalize();
  return r;
}

}  // namespace

TEST_CASE("identity run scores perfectly") {
  const auto d = ref_doc("h");
  const auto rep = evaluate(run_for(d, d.tgt_segments), d);
  CHECK(rep.bleu.score == 100.0);
  CHECK(rep.d_bleu.format_with_bp() == "100.00 (1.00)");
  CHECK(rep.ltcr.ratio == 1.0);
  CHECK(rep.throughput == 12.0);
  CHECK_FALSE(rep.comet.has_value());
  CHECK(rep.notices.size() == 2);
}

TEST_CASE("table row has the expected columns") {
  const auto d = ref_doc("h");
  FunctionScorer half([](const ScoreItem&) { return 0.5; });
  FunctionChunkScorer quarter([](const SlideWindow&) { return 0.25; });
  EvalScorers s;
  s.sentence_metric = &half;
  s.window_metric = &quarter;
  const auto rep = evaluate(run_for(d, d.tgt_segments), d, s);
  CHECK(EvalReport::table_header() == "| System | BLEU | COMET | d-BLEU (BP) | d-COMET | LTCR |");
  CHECK(rep.table_row() == "| h | 100.00 | 50.00 | 100.00 (1.00) | 25.00 | 100.00 |");
  CHECK(rep.notices.empty());
  const auto bare = evaluate(run_for(d, d.tgt_segments), d);
  CHECK(bare.table_row() == "| h | 100.00 | - | 100.00 (1.00) | - | 100.00 |");
  CHECK(bare.to_json()["comet"].is_null());
}

TEST_CASE("mismatched ids are rejected") {
  const auto d = ref_doc("h");
  auto r = run_for(d, d.tgt_segments);
  r.doc_id = "other";
  CHECK_THROWS_AS(evaluate(r, d), ValidationError);
  Corpus refs;
  refs.docs.push_back(d);
  CHECK_THROWS_AS(evaluate_corpus({r}, refs), ValidationError);
  CHECK_THROWS_AS(evaluate_corpus({}, refs), ValidationError);
}

TEST_CASE("corpus report pools documents") {
  Corpus refs;
  refs.docs.push_back(ref_doc("a"));
  refs.docs.push_back(ref_doc("b"));
  const auto ra = run_for(refs.docs[0], refs.docs[0].tgt_segments);
  const auto rb = run_for(refs.docs[1], {"the port is old", "the port is big", "we see the harbor"});
  const auto rep = evaluate_corpus({ra, rb}, refs);
  CHECK(rep.documents.size() == 2);
  CHECK(rep.total.n_docs == 2);
  CHECK(rep.total.n_sentences == 6);
  CHECK(rep.total.throughput == 12.0);
  CHECK(rep.total.bleu.score < 100.0);
  CHECK(rep.total.ltcr.total_pairs == rep.documents[0].ltcr.total_pairs + rep.documents[1].ltcr.total_pairs);
  const auto table = rep.to_table();
  CHECK(table.find("| corpus |") != std::string::npos);
  CHECK(rep.to_json()["documents"].size() == 2);
}

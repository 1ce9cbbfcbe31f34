// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "docmt/augmentation.hpp"
#include "docmt/backend.hpp"
#include "docmt/cli.hpp"
#include "docmt/curation.hpp"
#include "docmt/evaluation.hpp"
#include "docmt/inference.hpp"
#include "docmt/prompt.hpp"
#include "docmt/random.hpp"
#include "docmt/text.hpp"
#include "../support/gen.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using namespace docmt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome bleu_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  int nontrivial = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = testgen::vocab(rng, 1 + rng.below(20));
    const std::size_t n = 1 + rng.below(10);
    auto ref = testgen::sentences(rng, v, n, 1, 12);
    std::vector<std::string> hyp;
    for (const auto& r : ref) {
      // Mix of near-copies and unrelated sentences.
      if (rng.below(3) == 0) {
        hyp.push_back(testgen::sentence(rng, v, 1, 12));
      } else {
        auto w = oracle::words(r);
        if (!w.empty() && rng.below(2)) w.erase(w.begin() + static_cast<long>(rng.below(w.size())));
        w.push_back(v[rng.below(v.size())]);
        hyp.push_back(text::join(w, " "));
      }
    }
    const auto got = bleu(hyp, ref);
    const auto want = oracle::bleu(hyp, ref);
    worst = std::max(worst, std::abs(got.score - want.score));
    if (want.score > 0.0 && want.score < 100.0) ++nontrivial;
    o.require(std::abs(got.score - want.score) <= 0.01,
              "trial " + std::to_string(trial) + ": bleu " + fmt(got.score) + " vs oracle " + fmt(want.score));

    std::vector<std::vector<std::string>> hd{hyp}, rd{ref};
    const auto gd = d_bleu_corpus(hd, rd);
    const auto wd = oracle::bleu({text::join(hyp, " ")}, {text::join(ref, " ")});
    o.require(std::abs(gd.score - wd.score) <= 0.01,
              "trial " + std::to_string(trial) + ": d-bleu " + fmt(gd.score) + " vs oracle " + fmt(wd.score));

    const auto id = d_bleu(ref, ref);
    o.require(id.score == 100.0 && id.format_with_bp() == "100.00 (1.00)",
              "identity d-BLEU formatted as " + id.format_with_bp());
    o.require(bleu(ref, ref).score == 100.0, "identity BLEU not 100");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 5.0, "runtime " + fmt(secs) + " s");
  o.require(nontrivial >= 5, "only " + std::to_string(nontrivial) + " trials scored strictly inside (0, 100)");
  if (o.pass)
    o.detail = "max |diff| " + fmt(worst) + " over " + std::to_string(nontrivial) + " non-trivial corpora, " +
               fmt(secs) + " s";
  return o;
}

Outcome brevity() {
  Outcome o;
  const double bp = brevity_penalty(50, 100);
  o.require(std::abs(bp - std::exp(-1.0)) <= 1e-6, "BP " + fmt(bp));
  // Same through the scorer on a 50-token hypothesis against a 100-token reference.
  std::string hyp, ref;
  for (int i = 0; i < 100; ++i) {
    const std::string w = "w" + std::to_string(i);
    if (i < 50) hyp += (i ? " " : "") + w;
    ref += (i ? " " : "") + w;
  }
  const auto b = bleu({hyp}, {ref});
  o.require(b.hyp_len == 50 && b.ref_len == 100, "lengths");
  o.require(std::abs(b.bp - std::exp(-1.0)) <= 1e-6, "scorer BP " + fmt(b.bp));
  if (o.pass) o.detail = "BP " + fmt(bp);
  return o;
}

bool has_reason(const SegmentVerdict& v, DropReason r) {
  return std::find(v.reasons.begin(), v.reasons.end(), r) != v.reasons.end();
}

Outcome curation_boundaries() {
  Outcome o;
  const FilterConfig cfg;
  Rng rng(7);
  const std::string src_abc = "abcdefghijklm", tgt_abc = "nopqrstuvwxyz";

  auto doc_with = [&](std::size_t src_words, std::size_t tgt_words) {
    return testgen::make_doc("b", {testgen::words_text(rng, src_words, src_abc)},
                             {testgen::words_text(rng, tgt_words, tgt_abc)});
  };
  auto v49 = heuristic_verdict(doc_with(49, 49), cfg);
  auto v50 = heuristic_verdict(doc_with(50, 50), cfg);
  o.require(has_reason(v49, DropReason::MIN_WORDS) && !v49.keep, "49-word doc kept");
  o.require(v50.keep, "50-word doc dropped");

  auto r131 = heuristic_verdict(doc_with(131, 100), cfg);
  auto r130 = heuristic_verdict(doc_with(130, 100), cfg);
  auto r131b = heuristic_verdict(doc_with(100, 131), cfg);
  o.require(has_reason(r131, DropReason::LENGTH_RATIO) && !r131.keep, "ratio 1.31 kept");
  o.require(has_reason(r131b, DropReason::LENGTH_RATIO), "ratio 1/1.31 kept");
  o.require(r130.keep, "ratio 1.30 dropped");

  auto scores_with_bad = [](std::size_t bad) {
    std::vector<double> s(100, 0.9);
    for (std::size_t i = 0; i < bad; ++i) s[i * 4] = 0.3;
    return s;
  };
  const auto s21 = scores_with_bad(21), s20 = scores_with_bad(20);
  o.require(!qe_document_filter(s21, cfg.qe_segment_threshold, cfg.doc_bad_fraction_max), "21% bad kept");
  o.require(qe_document_filter(s20, cfg.qe_segment_threshold, cfg.doc_bad_fraction_max), "20% bad dropped");

  // Same boundary through the segment scorer path on a 100-segment doc.
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 100; ++i) {
    src.push_back("s" + std::to_string(i) + " " + testgen::words_text(rng, 3, src_abc));
    tgt.push_back("t" + std::to_string(i) + " " + testgen::words_text(rng, 3, tgt_abc));
  }
  const auto seg_doc = testgen::make_doc("q", src, tgt);
  for (std::size_t bad : {20u, 21u}) {
    std::map<std::string, double> by_src;
    const auto sc = scores_with_bad(bad);
    for (std::size_t i = 0; i < src.size(); ++i) by_src[src[i]] = sc[i];
    FunctionScorer qe([&](const ScoreItem& it) { return by_src.at(it.src); });
    const auto v = qe_verdict(seg_doc, &qe, nullptr, cfg);
    o.require(v.keep == (bad == 20), "scorer path with " + std::to_string(bad) + "% bad");
  }

  // Dedup idempotence over 1k documents with whitespace/case variants.
  Corpus corpus;
  const auto voc = testgen::vocab(rng, 30);
  std::vector<ParallelDoc> originals;
  for (int i = 0; i < 300; ++i)
    originals.push_back(testgen::make_doc("d" + std::to_string(i), testgen::sentences(rng, voc, 1 + rng.below(4)),
                                          testgen::sentences(rng, voc, 1 + rng.below(4))));
  for (int i = 0; i < 1000; ++i) {
    if (i < 300) {
      corpus.docs.push_back(originals[static_cast<std::size_t>(i)]);
      continue;
    }
    auto d = originals[rng.below(originals.size())];
    d.doc_id = "v" + std::to_string(i);
    if (rng.below(2))
      for (auto& s : d.src_segments) s = "  " + s + " ";
    corpus.docs.push_back(d);
  }
  const auto once = deduplicate(corpus);
  const auto twice = deduplicate(once);
  o.require(once == twice, "dedup not idempotent");
  o.require(once.size() <= 300 && !once.empty(), "dedup kept " + std::to_string(once.size()));
  if (o.pass) o.detail = "1000 docs -> " + std::to_string(once.size()) + " unique";
  return o;
}

Outcome mrd2d() {
  Outcome o;
  Rng rng(202);
  const auto voc = testgen::vocab(rng, 40);
  std::size_t checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto doc = testgen::make_doc("m" + std::to_string(i), testgen::sentences(rng, voc, 1 + rng.below(12)),
                                       testgen::sentences(rng, voc, 1 + rng.below(12)));
    for (std::size_t k : {1u, 2u, 4u}) {
      const auto parts = mrd2d_split(doc, k);
      const std::size_t want = std::min({k, doc.src_segments.size(), doc.tgt_segments.size()});
      o.require(parts.size() == want, doc.doc_id + " k=" + std::to_string(k) + ": " +
                                          std::to_string(parts.size()) + " parts, want " + std::to_string(want));
      std::string src, tgt;
      for (const auto& p : parts) {
        o.require(!p.src_segments.empty() && !p.tgt_segments.empty(), "empty part");
        for (const auto& s : p.src_segments) src += s + "\n";
        for (const auto& s : p.tgt_segments) tgt += s + "\n";
      }
      std::string src0, tgt0;
      for (const auto& s : doc.src_segments) src0 += s + "\n";
      for (const auto& s : doc.tgt_segments) tgt0 += s + "\n";
      o.require(src == src0 && tgt == tgt0, doc.doc_id + " k=" + std::to_string(k) + ": reconstruction differs");
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " splits";
  return o;
}

Outcome capt() {
  Outcome o;
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 5; ++i) {
    src.push_back("source chunk " + std::to_string(i));
    tgt.push_back("target chunk " + std::to_string(i));
  }
  const auto doc = testgen::make_doc("c", src, tgt);
  const auto ex = build_capt_examples(doc, ChunkingSpec{ChunkingSpec::Unit::segments, 1}, 3);
  std::vector<std::size_t> sizes;
  for (const auto& e : ex) sizes.push_back(e.context.size());
  o.require(sizes == std::vector<std::size_t>{0, 1, 2, 3, 3}, "context sizes wrong");
  for (std::size_t i = 0; i < ex.size() && o.pass; ++i) {
    o.require(ex[i].source == src[i] && ex[i].target == tgt[i], "example " + std::to_string(i) + " payload");
    const std::size_t first = i >= 3 ? i - 3 : 0;
    for (std::size_t j = 0; j < ex[i].context.size(); ++j)
      o.require(ex[i].context[j] == ContextPair{src[first + j], tgt[first + j]},
                "example " + std::to_string(i) + " context " + std::to_string(j));
  }
  if (o.pass) o.detail = "sizes [0,1,2,3,3]";
  return o;
}

Outcome prompts() {
  Outcome o;
  const fs::path dir = DOCMT_FIXTURES_DIR;
  auto ex = [](std::string s, std::string t, std::vector<ContextPair> ctx, std::string source,
               std::optional<std::string> target) {
    ContextualExample e;
    e.src_lang = LangCode::parse(s);
    e.tgt_lang = LangCode::parse(t);
    e.context = std::move(ctx);
    e.source = std::move(source);
    e.target = std::move(target);
    return e;
  };
  struct Golden {
    const char* file;
    ContextualExample example;
    PromptMode mode;
  };
  const std::vector<Golden> goldens = {
      {"prompt_sentence_en_de.txt", ex("en", "de", {}, "Hello.", "Hallo."), PromptMode::sentence},
      {"prompt_contextual_en_zh.txt",
       ex("en", "zh",
          {{"The meeting starts at nine", "会议九点开始"},
           {"Bring the report", "带上报告"},
           {"Maria will present it", "玛丽亚会做介绍"}},
          "Questions come afterwards", "之后是提问环节"),
       PromptMode::contextual},
      {"prompt_doc2doc_de_en.txt",
       ex("de", "en", {}, "Der Zug war spät\nWir warteten eine Stunde",
          "The train was late\nWe waited for an hour"),
       PromptMode::doc2doc},
      {"prompt_contextual_empty_fr_en.txt", ex("fr", "en", {}, "Bonjour tout le monde", std::nullopt),
       PromptMode::contextual},
  };
  for (const auto& g : goldens) {
    const std::string want = read_file(dir / g.file);
    o.require(!want.empty(), std::string("missing fixture ") + g.file);
    o.require(render(g.example, g.mode).text == want, std::string("mismatch against ") + g.file);
  }

  Rng rng(303);
  const auto voc = testgen::vocab(rng, 25);
  const std::vector<std::string> langs = {"en", "de", "fr", "zh", "ko", "nl"};
  const std::string end(kTurnEnd);
  for (int i = 0; i < 100; ++i) {
    ContextualExample e;
    e.src_lang = LangCode::parse(langs[rng.below(langs.size())]);
    e.tgt_lang = LangCode::parse(langs[rng.below(langs.size())]);
    const auto mode = static_cast<PromptMode>(rng.below(3));
    if (mode == PromptMode::contextual)
      for (std::size_t c = rng.below(4); c > 0; --c)
        e.context.push_back({testgen::sentence(rng, voc, 1, 6), testgen::sentence(rng, voc, 1, 6)});
    e.source = text::join(testgen::sentences(rng, voc, 1 + rng.below(3)), "\n");
    const std::string target = text::join(testgen::sentences(rng, voc, 1 + rng.below(3)), "\n");
    e.target = target;
    const auto rec = emit_training_record(e, mode);
    const auto& p = rec.prompt;
    o.require(p.target_span.has_value(), "no target span");
    if (!o.pass) break;
    const std::string marker(kAssistantStart);
    const std::size_t expect_off = p.text.rfind(marker) + marker.size();
    o.require(p.target_span->offset == expect_off, "span offset " + std::to_string(i));
    o.require(p.text.substr(p.target_span->offset, p.target_span->length) == target + "." + end,
              "span slice " + std::to_string(i));
    o.require(p.target_span->offset + p.target_span->length == p.text.size(), "span not at end " + std::to_string(i));
  }
  if (o.pass) o.detail = std::to_string(goldens.size()) + " goldens, 100 spans";
  return o;
}

Outcome mbr() {
  Outcome o;
  Rng rng(404);
  auto neg_ed = [](std::string_view h, std::string_view r, const Context&) {
    return -static_cast<double>(oracle::edit_distance(std::string(h), std::string(r)));
  };
  FunctionUtility util(neg_ed);
  int affine_checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> cands;
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) cands.push_back(testgen::word(rng, "abc", 0, 5));
    const auto got = mbr_select(cands, {}, util);
    const auto want = oracle::mbr_argmax(cands, [](const std::string& y, const std::string& t) {
      return -static_cast<double>(oracle::edit_distance(y, t));
    });
    o.require(got.chosen_index == want, "trial " + std::to_string(trial) + ": chose " +
                                            std::to_string(got.chosen_index) + ", oracle " + std::to_string(want));
    const double a = 0.25 + static_cast<double>(rng.below(40)) / 8.0;
    const double b = static_cast<double>(rng.below(200)) - 100.0;
    FunctionUtility affine([&](std::string_view h, std::string_view r, const Context& c) {
      return a * neg_ed(h, r, c) + b;
    });
    o.require(mbr_select(cands, {}, affine).chosen_index == got.chosen_index,
              "affine variance on trial " + std::to_string(trial));
    ++affine_checks;
  }
  if (o.pass) o.detail = "1000 trials, " + std::to_string(affine_checks) + " affine checks";
  return o;
}

ParallelDoc eight_segment_doc() {
  std::vector<std::string> src;
  for (int i = 0; i < 8; ++i) {
    std::string s = "sentence" + std::to_string(i);
    for (int w = 0; w < 9; ++w) s += " word" + std::to_string(w);
    src.push_back(s);
  }
  return testgen::make_doc("inf", src, src);
}

Outcome inference_modes() {
  Outcome o;
  const auto doc = eight_segment_doc();
  const std::string joined = text::join(doc.src_segments, "\n");
  CharFUtility charf;

  BackendConfig cfg;
  cfg.max_concurrency = 4;
  cfg.native_n = false;
  cfg.retry_base_delay = std::chrono::milliseconds(1);

  InferenceOptions opts;
  opts.chunking = {ChunkingSpec::Unit::segments, 2};
  InferenceOptions qopts = opts;
  qopts.params = DecodeParams::nucleus(0.6, 8);

  // Identity: every mode reproduces the source.
  for (auto mode : {InferenceMode::doc2doc, InferenceMode::chunk, InferenceMode::context_chunk,
                    InferenceMode::quality_chunk}) {
    BackendClient client(MockTransport::make(MockBehavior::identity), cfg);
    const auto run = translate(mode, doc, client, mode == InferenceMode::quality_chunk ? qopts : opts, &charf);
    o.require(run.merged == joined, to_string(mode) + ": merged differs from source");
  }

  // Chunked requests overlap.
  {
    MockTransport::Options mo;
    mo.latency = std::chrono::milliseconds(30);
    auto mock = std::make_shared<MockTransport>(mo);
    BackendClient client(mock, cfg);
    translate_chunked(doc, client, opts);
    o.require(mock->max_in_flight() > 1, "chunked in-flight peak " + std::to_string(mock->max_in_flight()));
  }

  // Contextual prompts carry the model's outputs, not the references.
  {
    MockTransport::Options mo;
    mo.behavior = MockBehavior::scripted;
    mo.script = [](const ChatRequest& req, std::size_t call, std::size_t) {
      const auto parsed = parse_user_content(req.user_content);
      return MockReply{200, "OUT" + std::to_string(call) + " " + parsed.source};
    };
    auto mock = std::make_shared<MockTransport>(mo);
    BackendClient client(mock, cfg);
    InferenceOptions copts;
    copts.chunking = {ChunkingSpec::Unit::segments, 1};
    const auto run = translate_contextual(doc, client, copts);
    const auto reqs = mock->requests();
    o.require(reqs.size() == doc.src_segments.size(), "contextual request count");
    for (std::size_t i = 0; i < reqs.size() && o.pass; ++i) {
      const auto ctx = parse_user_content(reqs[i].user_content).context;
      const std::size_t first = i >= 3 ? i - 3 : 0;
      o.require(ctx.size() == i - first, "context size at chunk " + std::to_string(i));
      for (std::size_t j = 0; j < ctx.size() && o.pass; ++j) {
        o.require(ctx[j].src == doc.src_segments[first + j], "context source");
        o.require(ctx[j].tgt == run.outputs[first + j] && ctx[j].tgt != doc.tgt_segments[first + j],
                  "context target is not the model output at chunk " + std::to_string(i));
      }
    }
  }

  // Throughput ordering under a latency model with a fixed per-call cost
  // plus a decode cost per output word.
  std::map<InferenceMode, double> tps;
  for (auto mode : {InferenceMode::chunk, InferenceMode::doc2doc, InferenceMode::context_chunk,
                    InferenceMode::quality_chunk}) {
    MockTransport::Options mo;
    mo.latency = std::chrono::milliseconds(40);
    mo.latency_per_word = std::chrono::microseconds(2000);
    mo.native_n = false;
    BackendClient client(std::make_shared<MockTransport>(mo), cfg);
    auto o2 = mode == InferenceMode::quality_chunk ? qopts : opts;
    o2.timing = TimingMode::wall;
    tps[mode] = translate(mode, doc, client, o2, &charf).throughput;
  }
  const double c = tps[InferenceMode::chunk], d = tps[InferenceMode::doc2doc],
               x = tps[InferenceMode::context_chunk], q = tps[InferenceMode::quality_chunk];
  const std::string tp = "chunk " + fmt(c) + " > doc2doc " + fmt(d) + " > context " + fmt(x) + " > quality " + fmt(q);
  o.require(c > d && d > x && x > q, "ordering violated: " + tp);
  if (o.pass) o.detail = tp + " tok/s";
  return o;
}

Outcome slide() {
  Outcome o;
  const std::vector<std::size_t> lens = {100, 300, 50, 200, 124, 250};
  std::vector<std::string> sents;
  for (auto n : lens) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " t" : "t") + std::to_string(i);
    sents.push_back(s);
  }
  const WhitespaceTokenCounter counter(1.0);
  FunctionChunkScorer size_scorer([](const SlideWindow& w) { return static_cast<double>(w.tokens); });
  const double got = slide_score(sents, sents, sents, size_scorer, counter, {512, 256});
  const auto sums = oracle::slide_window_sums(lens, 512, 256);
  const double want = std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(sums.size());
  o.require(want == 358.0, "hand enumeration " + fmt(want));
  o.require(std::abs(got - 358.0) < 1e-9, "slide mean " + fmt(got));

  Rng rng(505);
  FunctionChunkScorer constant([](const SlideWindow&) { return 0.7; });
  const auto voc = testgen::vocab(rng, 50);
  for (int t = 0; t < 50; ++t) {
    const auto doc = testgen::sentences(rng, voc, 1 + rng.below(30), 1, 60);
    const double v = slide_score(doc, doc, doc, constant, counter, {64, 32});
    o.require(std::abs(v - 0.7) < 1e-12, "constant scorer gave " + fmt(v));
    std::vector<std::size_t> l;
    for (const auto& s : doc) l.push_back(counter.count(s));
    const auto oracle_sums = oracle::slide_window_sums(l, 64, 32);
    const double m = slide_score(doc, doc, doc, size_scorer, counter, {64, 32});
    const double om =
        std::accumulate(oracle_sums.begin(), oracle_sums.end(), 0.0) / static_cast<double>(oracle_sums.size());
    o.require(std::abs(m - om) < 1e-9, "random doc window mean " + fmt(m) + " vs " + fmt(om));
  }
  if (o.pass) o.detail = "mean " + fmt(got);
  return o;
}

class PositionalAligner final : public WordAligner {
 public:
  std::vector<std::optional<std::string>> align(const std::vector<std::string>& s,
                                                const std::vector<std::string>& t) override {
    std::vector<std::optional<std::string>> out(s.size());
    for (std::size_t i = 0; i < s.size() && i < t.size(); ++i) out[i] = t[i];
    return out;
  }
};

Outcome ltcr_check() {
  Outcome o;
  PositionalAligner aligner;
  const std::vector<SentencePair> doc_a = {
      {"network alpha", "netz eins", ""}, {"network bravo", "netz zwei", ""}, {"network charlie", "netz drei", ""}};
  const std::vector<SentencePair> doc_b = {
      {"engine delta", "motor vier", ""}, {"engine echo", "motor fuenf", ""}, {"engine foxtrot", "antrieb sechs", ""}};
  const auto r = ltcr({doc_a, doc_b}, aligner);
  o.require(r.consistent_pairs == 4 && r.total_pairs == 6, "pairs " + std::to_string(r.consistent_pairs) + "/" +
                                                                 std::to_string(r.total_pairs));
  o.require(r.ratio && *r.ratio == 4.0 / 6.0, "ratio");
  const auto swapped = ltcr({doc_b, doc_a}, aligner);
  o.require(swapped.ratio == r.ratio, "order dependence");

  Rng rng(606);
  const std::vector<std::string> terms = {"river", "bridge", "castle", "harbor"};
  const std::vector<std::string> trans = {"fluss", "strom", "bruecke", "burg", "hafen"};
  std::vector<std::vector<SentencePair>> docs;
  for (int d = 0; d < 6; ++d) {
    std::vector<SentencePair> doc;
    for (std::size_t s = 2 + rng.below(5); s > 0; --s)
      doc.push_back({terms[rng.below(terms.size())] + " " + terms[rng.below(terms.size())],
                     trans[rng.below(trans.size())] + " " + trans[rng.below(trans.size())], ""});
    docs.push_back(doc);
  }
  const auto base = ltcr(docs, aligner);
  for (int p = 0; p < 20; ++p) {
    rng.shuffle(docs);
    const auto r2 = ltcr(docs, aligner);
    o.require(r2.consistent_pairs == base.consistent_pairs && r2.total_pairs == base.total_pairs,
              "permutation changed LTCR");
  }
  if (o.pass) o.detail = "4/6 exact";
  return o;
}

Outcome alignment() {
  Outcome o;
  Rng rng(707);
  const auto voc = testgen::vocab(rng, 8, "abcdef");
  for (int trial = 0; trial < 500; ++trial) {
    const auto hyp = testgen::sentences(rng, voc, 1 + rng.below(6), 1, 4);
    const auto ref = testgen::sentences(rng, voc, 1 + rng.below(6), 1, 4);
    const auto a = align_sentences(hyp, ref);
    const double want = oracle::best_alignment_total(
        hyp, ref, [](const std::string& x, const std::string& y) { return char_bigram_fscore(x, y); });
    o.require(std::abs(a.total_similarity() - want) <= 1e-9,
              "trial " + std::to_string(trial) + ": " + fmt(a.total_similarity()) + " vs " + fmt(want));
    // Links are monotone and, with the null lists, cover each side exactly once.
    std::vector<int> hseen(hyp.size()), rseen(ref.size());
    std::size_t hpos = 0, rpos = 0;
    for (const auto& l : a.links) {
      o.require(l.hyp_begin >= hpos && l.ref_begin >= rpos, "non-monotone link");
      o.require(l.hyp_count >= 1 && l.hyp_count <= 2 && l.ref_count >= 1 && l.ref_count <= 2 &&
                    l.hyp_count + l.ref_count <= 3,
                "bad link shape");
      for (std::size_t k = 0; k < l.hyp_count && l.hyp_begin + k < hyp.size(); ++k) ++hseen[l.hyp_begin + k];
      for (std::size_t k = 0; k < l.ref_count && l.ref_begin + k < ref.size(); ++k) ++rseen[l.ref_begin + k];
      hpos = l.hyp_begin + l.hyp_count;
      rpos = l.ref_begin + l.ref_count;
    }
    for (auto i : a.null_hyp) ++hseen[i];
    for (auto i : a.null_ref) ++rseen[i];
    o.require(std::all_of(hseen.begin(), hseen.end(), [](int c) { return c == 1; }) &&
                  std::all_of(rseen.begin(), rseen.end(), [](int c) { return c == 1; }),
              "coverage broken on trial " + std::to_string(trial));
    if (!o.pass) break;
  }
  if (o.pass) o.detail = "500 trials";
  return o;
}

Outcome training_config() {
  Outcome o;
  const auto j = export_training_config().to_json();
  const nlohmann::json want = {{"batch_size", 32},    {"epochs", 2},       {"lr", 7e-6},
                               {"scheduler", "cosine"}, {"warmup_steps", 125}, {"weight_decay", 0.01},
                               {"optimizer", "adam"}, {"beta1", 0.9},      {"beta2", 0.999},
                               {"eps", 1e-8},         {"max_seq_len", 32768}};
  o.require(j.size() == want.size(), "field count " + std::to_string(j.size()));
  for (const auto& [k, v] : want.items()) {
    o.require(j.contains(k), "missing " + k);
    if (j.contains(k)) o.require(nlohmann::json(j.at(k)) == v, "field " + k + " = " + j.at(k).dump());
  }
  o.require(export_training_config().max_seq_len == kDefaultTokenBudget, "max_seq_len != concat budget");
  if (o.pass) o.detail = "11 fields";
  return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return out;
}

int cli(const std::vector<std::string>& args, std::string& log) {
  std::vector<std::string> full = {"docmt"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int rc = run_cli(full, out, err);
  log += out.str() + err.str();
  return rc;
}

Outcome end_to_end() {
  Outcome o;
  const fs::path toy = fs::path(DOCMT_FIXTURES_DIR) / "toy_corpus.jsonl";
  const fs::path base = fs::temp_directory_path() / ("docmt_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> snaps;
  std::vector<std::string> stdout_logs;
  for (int run = 0; run < 2; ++run) {
    const fs::path d = base / ("run" + std::to_string(run));
    fs::create_directories(d);
    std::string log;
    const auto p = [&](const char* name) { return (d / name).string(); };
    const std::vector<std::vector<std::string>> steps = {
        {"--seed", "17", "curate", toy.string(), p("curated.jsonl")},
        {"--seed", "17", "augment", p("curated.jsonl"), p("augmented.jsonl")},
        {"--seed", "17", "format", p("augmented.jsonl.capt.jsonl"), p("train.jsonl"), "--mode", "contextual"},
        {"--seed", "17", "translate", p("curated.jsonl"), p("translate"), "--mode", "quality", "--mock", "noisy",
         "--n", "4", "--chunk-size", "2"},
        {"--seed", "17", "translate", p("curated.jsonl"), p("translate_ctx"), "--mode", "context", "--mock",
         "noisy"},
        {"--seed", "17", "evaluate", p("translate"), p("curated.jsonl"), "--out", p("report.json"), "--table",
         p("report.md")},
    };
    for (const auto& s : steps) {
      const int rc = cli(s, log);
      o.require(rc == 0, "step '" + s[2] + "' exited " + std::to_string(rc) + ": " + log);
    }
    if (!o.pass) break;
    snaps.push_back(snapshot(d));
    // Paths differ between runs; compare the console output with them removed.
    std::string scrubbed = log;
    for (std::size_t pos; (pos = scrubbed.find(d.string())) != std::string::npos;)
      scrubbed.replace(pos, d.string().size(), "<dir>");
    stdout_logs.push_back(scrubbed);
  }
  if (o.pass) {
    o.require(snaps[0].size() == snaps[1].size() && snaps[0].size() >= 8,
              "file sets differ (" + std::to_string(snaps[0].size()) + " files)");
    for (const auto& [name, bytes] : snaps[0]) {
      auto it = snaps[1].find(name);
      o.require(it != snaps[1].end() && it->second == bytes, "output differs: " + name);
      o.require(!bytes.empty() || name.find("drops") != std::string::npos, "empty output: " + name);
    }
    o.require(stdout_logs[0] == stdout_logs[1], "console output differs");
  }
  fs::remove_all(base);
  if (o.pass) o.detail = std::to_string(snaps[0].size()) + " files byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"bleu-oracle", bleu_oracle},
      {"brevity-penalty", brevity},
      {"curation-boundaries", curation_boundaries},
      {"mrd2d-split", mrd2d},
      {"capt-context", capt},
      {"prompt-golden", prompts},
      {"mbr-select", mbr},
      {"inference-modes", inference_modes},
      {"slide-windows", slide},
      {"ltcr", ltcr_check},
      {"alignment-dp", alignment},
      {"training-config", training_config},
      {"end-to-end-determinism", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " - " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

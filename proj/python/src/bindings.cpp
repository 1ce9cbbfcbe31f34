#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "docmt/augmentation.hpp"
#include "docmt/cli.hpp"
#include "docmt/corpus.hpp"
#include "docmt/curation.hpp"
#include "docmt/evaluation.hpp"
#include "docmt/inference.hpp"
#include "docmt/prompt.hpp"

namespace py = pybind11;
using namespace docmt;

// Structured values cross the boundary as JSON text; the Python package
// wraps these in dict/list helpers.
namespace {

using Json = nlohmann::json;

ParallelDoc doc_arg(const std::string& s) { return doc_from_json(Json::parse(s)); }

std::string docs_out(const std::vector<ParallelDoc>& docs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : docs) arr.push_back(doc_to_json(d));
  return arr.dump();
}

Corpus corpus_arg(const std::string& s) {
  Corpus c;
  for (const auto& j : Json::parse(s)) c.docs.push_back(doc_from_json(j));
  return c;
}

py::dict bleu_dict(const BleuScore& b) {
  py::dict d;
  d["score"] = b.score;
  d["bp"] = b.bp;
  d["precisions"] = std::vector<double>(b.precisions.begin(), b.precisions.end());
  d["hyp_len"] = b.hyp_len;
  d["ref_len"] = b.ref_len;
  d["formatted"] = b.format_with_bp();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Document-level MT data and inference toolkit";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
  py::register_exception<ScorerError>(m, "ScorerError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("parse_corpus", [](const std::string& jsonl) { return docs_out(parse_corpus(jsonl).docs); },
        py::arg("jsonl"));
  m.def("corpus_stats", [](const std::string& docs) { return corpus_stats(corpus_arg(docs)).to_json().dump(); },
        py::arg("docs"));

  m.def(
      "curate",
      [](const std::string& docs, const std::string& config) {
        FilterConfig cfg;
        cfg.apply_json(Json::parse(config));
        const auto res = run_pipeline(corpus_arg(docs), cfg);
        nlohmann::ordered_json out;
        out["docs"] = Json::parse(docs_out(res.corpus.docs));
        out["log"] = nlohmann::ordered_json::array();
        for (const auto& r : res.log) out["log"].push_back(r.to_json());
        out["notices"] = res.notices;
        return out.dump();
      },
      py::arg("docs"), py::arg("config") = "{}");
  m.def("deduplicate", [](const std::string& docs) { return docs_out(deduplicate(corpus_arg(docs)).docs); });
  m.def("balance", [](const std::string& docs, uint64_t seed) { return docs_out(balance_corpus(corpus_arg(docs), seed).docs); });

  m.def("mrd2d_split", [](const std::string& doc, std::size_t k) { return docs_out(mrd2d_split(doc_arg(doc), k)); },
        py::arg("doc"), py::arg("k"));
  m.def(
      "capt_examples",
      [](const std::string& doc, std::size_t n, std::size_t chunk_size) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& e : build_capt_examples(doc_arg(doc), {ChunkingSpec::Unit::segments, chunk_size}, n))
          arr.push_back(e.to_json());
        return arr.dump();
      },
      py::arg("doc"), py::arg("n") = kDefaultCaptWindow, py::arg("chunk_size") = 1);

  m.def(
      "render_prompt",
      [](const std::string& example, const std::string& mode) {
        const auto p = render(ContextualExample::from_json(Json::parse(example)), prompt_mode_from_string(mode));
        py::object span = py::none();
        if (p.target_span) span = py::make_tuple(p.target_span->offset, p.target_span->length);
        return py::make_tuple(p.text, span);
      },
      py::arg("example"), py::arg("mode"));
  m.def("training_config", [] { return export_training_config().to_json().dump(); });

  m.def("bleu", [](const std::vector<std::string>& h, const std::vector<std::string>& r) { return bleu_dict(bleu(h, r)); });
  m.def("d_bleu", [](const std::vector<std::string>& h, const std::vector<std::string>& r) { return bleu_dict(d_bleu(h, r)); });
  m.def("align_sentences", [](const std::vector<std::string>& h, const std::vector<std::string>& r) {
    const auto a = align_sentences(h, r);
    std::vector<py::tuple> links;
    for (const auto& l : a.links)
      links.push_back(py::make_tuple(l.hyp_begin, l.hyp_count, l.ref_begin, l.ref_count, l.similarity));
    return py::make_tuple(links, a.null_hyp, a.null_ref);
  });
  m.def("slide_windows", [](const std::vector<std::size_t>& lengths, std::size_t window, std::size_t stride) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& w : slide_windows(lengths, {window, stride})) out.push_back(w.units);
    return out;
  });
  m.def("ltcr", [](const std::vector<std::vector<std::pair<std::string, std::string>>>& docs) {
    std::vector<std::vector<SentencePair>> in;
    for (const auto& d : docs) {
      in.emplace_back();
      for (const auto& [s, h] : d) in.back().push_back({s, h, ""});
    }
    CharOverlapAligner aligner;
    const auto r = ltcr(in, aligner);
    return py::make_tuple(r.consistent_pairs, r.total_pairs, r.ratio);
  });

  m.def(
      "mbr_select",
      [](const std::vector<std::string>& candidates, std::function<double(std::string, std::string)> utility) {
        FunctionUtility u([&](std::string_view h, std::string_view r, const Context&) {
          return utility(std::string(h), std::string(r));
        });
        const auto set = mbr_select(candidates, {}, u);
        return py::make_tuple(set.chosen_index, set.expected_utility);
      },
      py::arg("candidates"), py::arg("utility"));

  m.def(
      "translate_mock",
      [](const std::string& doc, const std::string& mode, const std::string& behavior, std::size_t chunk_size,
         std::size_t n, uint64_t seed) {
        MockTransport::Options mo;
        mo.behavior = mock_behavior_from_string(behavior);
        mo.seed = seed;
        BackendClient client(std::make_shared<MockTransport>(mo), BackendConfig{});
        InferenceOptions opts;
        opts.chunking = {ChunkingSpec::Unit::segments, chunk_size};
        opts.timing = TimingMode::simulated;
        const auto m = inference_mode_from_string(mode);
        if (m == InferenceMode::quality_chunk) opts.params = DecodeParams::nucleus(0.6, n);
        CharFUtility utility;
        py::gil_scoped_release release;
        return translate(m, doc_arg(doc), client, opts, &utility).to_json().dump();
      },
      py::arg("doc"), py::arg("mode"), py::arg("behavior") = "identity", py::arg("chunk_size") = 1,
      py::arg("n") = 32, py::arg("seed") = 0);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "docmt");
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}

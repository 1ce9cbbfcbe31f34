#include "docmt/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "docmt/augmentation.hpp"
#include "docmt/backend.hpp"
#include "docmt/corpus.hpp"
#include "docmt/curation.hpp"
#include "docmt/inference.hpp"
#include "docmt/prompt.hpp"
#include "docmt/report.hpp"
#include "docmt/scoring.hpp"
#include "docmt/text.hpp"

namespace fs = std::filesystem;

namespace docmt {

namespace {

constexpr const char* kMockEnv = "DOCMT_MOCK_BACKEND";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename T>
std::string jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    out += item.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// Config file: either sectioned ({"filter": {...}, "augment": {...}, ...})
// or a bare section for the running subcommand.
struct ConfigFile {
  nlohmann::json root = nlohmann::json::object();

  static ConfigFile load(const std::optional<std::string>& path) {
    ConfigFile c;
    if (!path) return c;
    try {
      c.root = nlohmann::json::parse(read_file(*path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config " + *path + ": " + e.what());
    }
    if (!c.root.is_object()) throw ValidationError("config " + *path + " must be a JSON object");
    return c;
  }

  bool sectioned() const {
    for (const char* k : {"seed", "filter", "augment", "backend", "decode", "inference", "eval", "format"})
      if (root.contains(k)) return true;
    return false;
  }

  nlohmann::json section(const char* name) const {
    if (!sectioned()) return root;
    return root.contains(name) ? root.at(name) : nlohmann::json::object();
  }

  std::optional<uint64_t> seed() const {
    if (sectioned() && root.contains("seed")) return root.at("seed").get<uint64_t>();
    return std::nullopt;
  }
};

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config ") + section + ": bad value for '" + key + "'");
  }
}

template <typename T>
void set_if(const std::optional<T>& flag, T& out) {
  if (flag) out = *flag;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& part : text::split(s, ',')) {
    const auto t = text::collapse_whitespace(part);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      const auto v = std::stoul(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": not an integer list: '" + s + "'");
    }
  }
  return out;
}

InferenceMode cli_mode(const std::string& s) {
  if (s == "doc2doc") return InferenceMode::doc2doc;
  if (s == "chunk") return InferenceMode::chunk;
  if (s == "context") return InferenceMode::context_chunk;
  if (s == "quality") return InferenceMode::quality_chunk;
  return inference_mode_from_string(s);
}

// ---- shared state of one invocation --------------------------------------------

struct Globals {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<std::size_t> jobs;
};

struct CurateFlags {
  std::string in, out;
  std::optional<std::string> drop_log, report;
  std::optional<std::size_t> min_words;
  std::optional<double> identical_max, length_ratio_max, qe_threshold, fluency_threshold, bad_fraction_max,
      lid_min_confidence;
  std::optional<std::string> qe_url, fluency_url;
  bool balance = false;
};

struct AugmentFlags {
  std::string in, out;
  std::optional<std::string> mrd2d, capt_out, sentences, chunk_unit;
  std::optional<std::size_t> capt_n, budget, chunk_size;
  std::optional<double> sentence_mix;
};

struct FormatFlags {
  std::string in, out;
  std::string mode = "contextual";
  std::optional<std::string> training_config, chunk_unit;
  std::optional<std::size_t> capt_n, chunk_size;
};

struct TranslateFlags {
  std::string in, out;
  std::optional<std::string> mode, chunk_unit, timing, backend_url, model, api_key_env, mock, utility_url, request_log;
  std::optional<std::size_t> chunk_size, context_n, n, max_new_tokens, max_concurrency, max_retries;
  std::optional<double> top_p, temperature, timeout;
  bool utility_context = false;
  std::optional<std::size_t> mock_latency_ms, mock_latency_per_word_us;
};

struct EvaluateFlags {
  std::string run, ref, out;
  std::optional<std::string> scorer_url, table;
  std::optional<std::size_t> window, stride;
};

uint64_t resolve_seed(const Globals& g, const ConfigFile& cfg) {
  if (g.seed) return *g.seed;
  return cfg.seed().value_or(0);
}

std::unique_ptr<HttpScorerClient> make_scorer(const std::string& url, MetricKind metric) {
  ScoringServiceConfig sc;
  sc.base_url = url;
  sc.metric = metric;
  return std::make_unique<HttpScorerClient>(sc);
}

// ---- subcommands -----------------------------------------------------------------

int cmd_stats(const std::string& in, bool as_json, std::ostream& out) {
  const auto report = corpus_stats(load_corpus(in));
  if (as_json) {
    out << report.to_json().dump(2) << '\n';
  } else {
    out << report.to_table();
  }
  return kExitOk;
}

int cmd_curate(const CurateFlags& f, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto cfgfile = ConfigFile::load(g.config_path);
  FilterConfig cfg;
  cfg.apply_json(cfgfile.section("filter"));
  set_if(f.min_words, cfg.min_words);
  set_if(f.identical_max, cfg.identical_fraction_max);
  set_if(f.length_ratio_max, cfg.length_ratio_max);
  set_if(f.qe_threshold, cfg.qe_segment_threshold);
  set_if(f.fluency_threshold, cfg.fluency_segment_threshold);
  set_if(f.bad_fraction_max, cfg.doc_bad_fraction_max);
  set_if(f.lid_min_confidence, cfg.lid_min_confidence);
  cfg.validate();

  const Corpus corpus = load_corpus(f.in);
  std::unique_ptr<HttpScorerClient> qe, fluency;
  if (f.qe_url) qe = make_scorer(*f.qe_url, MetricKind::qe);
  if (f.fluency_url) fluency = make_scorer(*f.fluency_url, MetricKind::qe);
  PipelineScorers scorers{qe.get(), fluency.get(), nullptr};

  const fs::path drop_log = f.drop_log ? fs::path(*f.drop_log) : fs::path(f.out + ".drops.jsonl");
  PipelineResult res;
  try {
    res = run_pipeline(corpus, cfg, scorers);
  } catch (const PipelineAborted& e) {
    write_file(drop_log, jsonl(e.partial_log));
    throw;
  }
  for (const auto& n : res.notices) err << "notice: " << n << '\n';
  if (f.balance) {
    const auto before = res.corpus.size();
    res.corpus = balance_corpus(res.corpus, resolve_seed(g, cfgfile));
    err << "balanced: " << before << " -> " << res.corpus.size() << " docs\n";
    res.post = corpus_stats(res.corpus);
  }
  save_corpus(res.corpus, f.out);
  write_file(drop_log, jsonl(res.log));
  if (f.report) {
    nlohmann::ordered_json j;
    j["config"] = cfg.to_json();
    j["pre"] = res.pre.to_json();
    j["post"] = res.post.to_json();
    j["dropped"] = res.log.size();
    write_file(*f.report, j.dump(2) + "\n");
  }
  out << "Pre-filtering\n" << res.pre.to_table() << "\nPost-filtering\n" << res.post.to_table();
  out << "\nkept " << res.corpus.size() << " of " << corpus.size() << " documents\n";
  return kExitOk;
}

int cmd_augment(const AugmentFlags& f, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto cfgfile = ConfigFile::load(g.config_path);
  AugmentConfig cfg;
  cfg.apply_json(cfgfile.section("augment"));
  if (f.mrd2d) cfg.mrd2d_ks = parse_size_list(*f.mrd2d, "--mrd2d");
  set_if(f.capt_n, cfg.capt_window);
  set_if(f.budget, cfg.token_budget);
  set_if(f.sentence_mix, cfg.sentence_fraction);
  if (f.chunk_unit) cfg.capt_chunking.unit = chunk_unit_from_string(*f.chunk_unit);
  set_if(f.chunk_size, cfg.capt_chunking.size);
  cfg.capt_chunking.validate();
  if (!(cfg.sentence_fraction >= 0.0 && cfg.sentence_fraction <= 1.0))
    throw ValidationError("--sentence-mix must lie in [0, 1]");

  const Corpus corpus = load_corpus(f.in);
  std::optional<Corpus> sentences;
  if (f.sentences) sentences = load_corpus(*f.sentences);
  auto res = augment_corpus(corpus, cfg, sentences ? &*sentences : nullptr, resolve_seed(g, cfgfile));
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  save_corpus(res.corpus, f.out);
  const fs::path capt_out = f.capt_out ? fs::path(*f.capt_out) : fs::path(f.out + ".capt.jsonl");
  write_file(capt_out, jsonl(res.capt_examples));
  out << "wrote " << res.corpus.size() << " documents to " << f.out << " and " << res.capt_examples.size()
      << " contextual examples to " << capt_out.string() << '\n';
  return kExitOk;
}

int cmd_format(const FormatFlags& f, const Globals& g, std::ostream& out) {
  const auto cfgfile = ConfigFile::load(g.config_path);
  const nlohmann::json sec = cfgfile.section("format");
  std::string mode_s = f.mode;
  ChunkingSpec spec;
  std::size_t capt_n = kDefaultCaptWindow;
  std::string unit_s = to_string(spec.unit);
  take(sec, "chunk_unit", unit_s, "format");
  take(sec, "chunk_size", spec.size, "format");
  take(sec, "capt_n", capt_n, "format");
  spec.unit = chunk_unit_from_string(f.chunk_unit.value_or(unit_s));
  set_if(f.chunk_size, spec.size);
  set_if(f.capt_n, capt_n);
  spec.validate();
  const PromptMode mode = prompt_mode_from_string(mode_s);

  std::vector<TrainingRecord> records;
  const auto lines = read_jsonl(f.in);
  const bool is_corpus = !lines.empty() && lines.front().contains("src_segments");
  if (is_corpus) {
    const Corpus corpus = load_corpus(f.in);
    for (const auto& doc : corpus.docs) {
      std::vector<ContextualExample> examples;
      if (mode == PromptMode::contextual) {
        examples = build_capt_examples(doc, spec, capt_n);
      } else if (mode == PromptMode::doc2doc) {
        ContextualExample ex;
        ex.src_lang = doc.src_lang;
        ex.tgt_lang = doc.tgt_lang;
        ex.source = text::join(doc.src_segments, std::string(1, kRecordSeparator));
        ex.target = text::join(doc.tgt_segments, std::string(1, kRecordSeparator));
        examples.push_back(std::move(ex));
      } else {
        std::vector<ContextPair> pairs;
        try {
          pairs = aligned_segment_pairs(doc);
        } catch (const ValidationError& e) {
          throw ValidationError("doc '" + doc.doc_id + "': " + e.what());
        }
        for (auto& p : pairs) {
          ContextualExample ex;
          ex.src_lang = doc.src_lang;
          ex.tgt_lang = doc.tgt_lang;
          ex.source = std::move(p.src);
          ex.target = std::move(p.tgt);
          examples.push_back(std::move(ex));
        }
      }
      for (std::size_t i = 0; i < examples.size(); ++i) {
        try {
          records.push_back(emit_training_record(examples[i], mode, doc.doc_id, i));
        } catch (const ValidationError& e) {
          throw ValidationError("doc '" + doc.doc_id + "' chunk " + std::to_string(i) + ": " + e.what());
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        records.push_back(emit_training_record(ContextualExample::from_json(lines[i]), mode, "", i));
      } catch (const ValidationError& e) {
        throw ValidationError(f.in + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  write_file(f.out, jsonl(records));
  const fs::path cfg_path = f.training_config ? fs::path(*f.training_config) : fs::path(f.out + ".config.json");
  write_file(cfg_path, export_training_config().to_json().dump(2) + "\n");
  out << "wrote " << records.size() << " training records to " << f.out << '\n';
  return kExitOk;
}

int cmd_translate(const TranslateFlags& f, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto cfgfile = ConfigFile::load(g.config_path);
  const uint64_t seed = resolve_seed(g, cfgfile);

  // inference section
  const nlohmann::json inf = cfgfile.section("inference");
  std::string mode_s = "chunk";
  std::string unit_s = "segments";
  std::string timing_s;
  InferenceOptions opts;
  take(inf, "mode", mode_s, "inference");
  take(inf, "chunk_unit", unit_s, "inference");
  take(inf, "chunk_size", opts.chunking.size, "inference");
  take(inf, "context_n", opts.context_window, "inference");
  take(inf, "context_limit", opts.context_limit, "inference");
  take(inf, "utility_context_limit", opts.utility_context_limit, "inference");
  take(inf, "timing", timing_s, "inference");
  if (f.mode) mode_s = *f.mode;
  if (f.chunk_unit) unit_s = *f.chunk_unit;
  if (f.timing) timing_s = *f.timing;
  set_if(f.chunk_size, opts.chunking.size);
  set_if(f.context_n, opts.context_window);
  opts.chunking.unit = chunk_unit_from_string(unit_s);
  opts.chunking.validate();
  const InferenceMode mode = cli_mode(mode_s);

  // decode section
  const nlohmann::json dec = cfgfile.section("decode");
  opts.params = mode == InferenceMode::quality_chunk ? DecodeParams::nucleus() : DecodeParams::greedy();
  if (mode == InferenceMode::quality_chunk) {
    take(dec, "top_p", opts.params.top_p, "decode");
    take(dec, "n", opts.params.n_candidates, "decode");
    take(dec, "temperature", opts.params.temperature, "decode");
    set_if(f.top_p, opts.params.top_p);
    set_if(f.n, opts.params.n_candidates);
    set_if(f.temperature, opts.params.temperature);
  } else if (f.top_p || f.n) {
    err << "notice: --top-p/--n only apply to quality mode; decoding greedily\n";
  }
  take(dec, "max_new_tokens", opts.params.max_new_tokens, "decode");
  set_if(f.max_new_tokens, opts.params.max_new_tokens);
  opts.params.validate();

  // backend section
  const nlohmann::json be = cfgfile.section("backend");
  BackendConfig bcfg;
  std::size_t retry_ms = static_cast<std::size_t>(bcfg.retry_base_delay.count());
  take(be, "base_url", bcfg.base_url, "backend");
  take(be, "model", bcfg.model, "backend");
  take(be, "api_key_env", bcfg.api_key_env, "backend");
  take(be, "timeout_seconds", bcfg.timeout_seconds, "backend");
  take(be, "max_retries", bcfg.max_retries, "backend");
  take(be, "max_concurrency", bcfg.max_concurrency, "backend");
  take(be, "retry_base_delay_ms", retry_ms, "backend");
  take(be, "native_n", bcfg.native_n, "backend");
  set_if(f.backend_url, bcfg.base_url);
  set_if(f.model, bcfg.model);
  set_if(f.api_key_env, bcfg.api_key_env);
  set_if(f.timeout, bcfg.timeout_seconds);
  set_if(f.max_retries, bcfg.max_retries);
  set_if(f.max_concurrency, bcfg.max_concurrency);
  bcfg.retry_base_delay = std::chrono::milliseconds(retry_ms);
  if (g.jobs) bcfg.max_concurrency = std::min(bcfg.max_concurrency, *g.jobs);

  std::optional<std::string> mock = f.mock;
  if (!mock) {
    if (const char* env = std::getenv(kMockEnv); env && *env) mock = std::string(env) == "1" ? "identity" : env;
  }
  opts.timing = timing_s.empty() ? (mock ? TimingMode::simulated : TimingMode::wall) : timing_mode_from_string(timing_s);

  const fs::path outdir(f.out);
  fs::create_directories(outdir);
  if (f.request_log) bcfg.request_log = fs::path(*f.request_log);

  std::shared_ptr<Transport> transport;
  if (mock) {
    MockTransport::Options mo;
    mo.behavior = mock_behavior_from_string(*mock);
    mo.seed = seed;
    mo.latency = std::chrono::milliseconds(f.mock_latency_ms.value_or(20));
    mo.latency_per_word = std::chrono::microseconds(f.mock_latency_per_word_us.value_or(1000));
    mo.sleep = opts.timing == TimingMode::wall;
    mo.native_n = bcfg.native_n;
    transport = std::make_shared<MockTransport>(mo);
    err << "notice: using mock backend (" << *mock << ")\n";
  } else {
    transport = std::make_shared<HttpTransport>(bcfg);
  }
  BackendClient backend(transport, bcfg);

  std::unique_ptr<HttpScorerClient> utility_client;
  std::unique_ptr<UtilityMetric> utility;
  if (mode == InferenceMode::quality_chunk) {
    if (f.utility_url) {
      utility_client =
          make_scorer(*f.utility_url, f.utility_context ? MetricKind::context_ref_based : MetricKind::ref_based);
      utility = std::make_unique<ScorerUtility>(*utility_client, f.utility_context);
    } else {
      utility = std::make_unique<CharFUtility>();
    }
  }

  const Corpus corpus = load_corpus(f.in);
  const std::size_t jobs = std::max<std::size_t>(1, g.jobs.value_or(1));
  std::vector<std::optional<TranslationRun>> runs(corpus.size());
  std::vector<std::vector<LedgerEntry>> partial_ledgers(corpus.size());
  std::string first_error;
  for (std::size_t b = 0; b < corpus.size(); b += jobs) {
    std::vector<std::future<TranslationRun>> pending;
    const std::size_t e = std::min(corpus.size(), b + jobs);
    for (std::size_t i = b; i < e; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return translate(mode, corpus.docs[i], backend, opts, utility.get());
      }));
    }
    for (std::size_t i = b; i < e; ++i) {
      try {
        runs[i] = pending[i - b].get();
      } catch (const RunAborted& ex) {
        partial_ledgers[i] = ex.partial.ledger;
        if (first_error.empty()) first_error = ex.what();
      } catch (const ValidationError& ex) {
        throw ValidationError("doc '" + corpus.docs[i].doc_id + "': " + ex.what());
      }
    }
    if (!first_error.empty()) break;
  }

  Corpus hyp;
  std::string runs_out, ledger_out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (runs[i]) {
      hyp.docs.push_back(hypothesis_doc(corpus.docs[i], *runs[i]));
      runs_out += runs[i]->to_json().dump() + "\n";
      ledger_out += jsonl(runs[i]->ledger);
    } else {
      ledger_out += jsonl(partial_ledgers[i]);
    }
  }
  save_corpus(hyp, outdir / "hyp.jsonl");
  write_file(outdir / "runs.jsonl", runs_out);
  write_file(outdir / "ledger.jsonl", ledger_out);
  if (!first_error.empty()) throw BackendError(first_error);

  out << "translated " << hyp.size() << " documents (" << to_string(mode) << ", " << to_string(opts.timing)
      << " timing) into " << outdir.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateFlags& f, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto cfgfile = ConfigFile::load(g.config_path);
  const nlohmann::json sec = cfgfile.section("eval");
  EvalScorers scorers;
  std::optional<std::string> url;
  if (sec.contains("scorer_url")) url = sec.at("scorer_url").get<std::string>();
  take(sec, "window", scorers.slide.window, "eval");
  take(sec, "stride", scorers.slide.stride, "eval");
  take(sec, "ltcr_min_repeat", scorers.ltcr.min_repeat, "eval");
  if (f.scorer_url) url = f.scorer_url;
  set_if(f.window, scorers.slide.window);
  set_if(f.stride, scorers.slide.stride);
  if (scorers.slide.stride == 0 || scorers.slide.window < scorers.slide.stride)
    throw ValidationError("SLIDE needs window >= stride >= 1");

  fs::path run_path(f.run);
  if (fs::is_directory(run_path)) run_path /= "runs.jsonl";
  std::vector<TranslationRun> runs;
  for (const auto& j : read_jsonl(run_path)) runs.push_back(TranslationRun::from_json(j));
  const Corpus refs = load_corpus(f.ref);

  std::unique_ptr<HttpScorerClient> client;
  std::unique_ptr<ScorerChunkScorer> window;
  if (url) {
    client = make_scorer(*url, MetricKind::ref_based);
    if (client->healthy()) {
      window = std::make_unique<ScorerChunkScorer>(*client);
      scorers.sentence_metric = client.get();
      scorers.window_metric = window.get();
    } else {
      err << "notice: scoring service at " << *url << " is not healthy; neural columns absent\n";
    }
  }
  const auto report = evaluate_corpus(runs, refs, scorers);
  for (const auto& n : report.total.notices) err << "notice: " << n << '\n';
  write_file(f.out, report.to_json().dump(2) + "\n");
  if (f.table) write_file(*f.table, report.to_table());
  out << report.to_table();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document-level machine translation toolkit", "docmt"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (flags override it)");
  app.add_option("--seed", g.seed, "Seed for sampling and shuffling (default 0)");
  app.add_option("--jobs", g.jobs, "Upper bound on concurrent work")->check(CLI::PositiveNumber);

  std::string stats_in;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Print corpus statistics");
  stats->add_option("input", stats_in, "Corpus JSONL")->required();
  stats->add_flag("--json", stats_json, "Emit JSON instead of a table");

  CurateFlags cf;
  auto* curate = app.add_subcommand("curate", "Run the cleaning pipeline");
  curate->add_option("input", cf.in)->required();
  curate->add_option("output", cf.out)->required();
  curate->add_option("--min-words", cf.min_words, "Minimum source words per document (50)");
  curate->add_option("--identical-max", cf.identical_max, "Copy-through fraction limit (0.10)");
  curate->add_option("--length-ratio-max", cf.length_ratio_max, "Word-count ratio limit (1.3)");
  curate->add_option("--qe-threshold", cf.qe_threshold, "Segment QE threshold (0.65)");
  curate->add_option("--fluency-threshold", cf.fluency_threshold, "Segment fluency threshold (0.5)");
  curate->add_option("--bad-fraction-max", cf.bad_fraction_max, "Bad-segment fraction limit (0.20)");
  curate->add_option("--lid-min-confidence", cf.lid_min_confidence, "Language-ID confidence floor (0.5)");
  curate->add_option("--qe-url", cf.qe_url, "Scoring service for segment QE");
  curate->add_option("--fluency-url", cf.fluency_url, "Scoring service for segment fluency");
  curate->add_option("--drop-log", cf.drop_log, "Drop log path (default OUTPUT.drops.jsonl)");
  curate->add_option("--report", cf.report, "Write pre/post statistics as JSON");
  curate->add_flag("--balance", cf.balance, "Balance language pairs into and out of English");

  AugmentFlags af;
  auto* augment = app.add_subcommand("augment", "Concatenate, split and mix training documents");
  augment->add_option("input", af.in)->required();
  augment->add_option("output", af.out)->required();
  augment->add_option("--mrd2d", af.mrd2d, "Split factors (1,2,4)");
  augment->add_option("--capt-n", af.capt_n, "Context chunks per example (3)");
  augment->add_option("--budget", af.budget, "Token budget for concatenation (32768)");
  augment->add_option("--sentence-mix", af.sentence_mix, "Sentence-level share of the output (0.10)");
  augment->add_option("--sentences", af.sentences, "Sentence-level corpus to mix in");
  augment->add_option("--capt-out", af.capt_out, "Contextual examples path (default OUTPUT.capt.jsonl)");
  augment->add_option("--chunk-unit", af.chunk_unit, "segments or tokens");
  augment->add_option("--chunk-size", af.chunk_size, "Chunk size in the chosen unit (1)");

  FormatFlags ff;
  auto* format = app.add_subcommand("format", "Render training records");
  format->add_option("input", ff.in, "Corpus or contextual-example JSONL")->required();
  format->add_option("output", ff.out)->required();
  format->add_option("--mode", ff.mode, "contextual, doc2doc or sentence")
      ->check(CLI::IsMember({"contextual", "doc2doc", "sentence"}));
  format->add_option("--capt-n", ff.capt_n, "Context chunks per example (3)");
  format->add_option("--chunk-unit", ff.chunk_unit, "segments or tokens");
  format->add_option("--chunk-size", ff.chunk_size, "Chunk size in the chosen unit (1)");
  format->add_option("--training-config", ff.training_config, "Hyperparameter export path");

  TranslateFlags tf;
  auto* translate_cmd = app.add_subcommand("translate", "Translate documents");
  translate_cmd->add_option("input", tf.in)->required();
  translate_cmd->add_option("output", tf.out, "Output directory")->required();
  translate_cmd->add_option("--mode", tf.mode, "doc2doc, chunk, context or quality")
      ->check(CLI::IsMember({"doc2doc", "chunk", "context", "quality"}));
  translate_cmd->add_option("--chunk-size", tf.chunk_size, "Chunk size (1)");
  translate_cmd->add_option("--chunk-unit", tf.chunk_unit, "segments or tokens");
  translate_cmd->add_option("--context-n", tf.context_n, "Context chunks (3)");
  translate_cmd->add_option("--top-p", tf.top_p, "Nucleus mass for quality mode (0.6)");
  translate_cmd->add_option("--n", tf.n, "Candidates for quality mode (32)");
  translate_cmd->add_option("--temperature", tf.temperature, "Sampling temperature for quality mode (1.0)");
  translate_cmd->add_option("--max-new-tokens", tf.max_new_tokens, "Output cap (default twice the prompt estimate)");
  translate_cmd->add_option("--timing", tf.timing, "wall or simulated")->check(CLI::IsMember({"wall", "simulated"}));
  translate_cmd->add_option("--backend-url", tf.backend_url, "Chat-completions base URL");
  translate_cmd->add_option("--model", tf.model, "Model name sent to the backend");
  translate_cmd->add_option("--api-key-env", tf.api_key_env, "Environment variable holding the API key");
  translate_cmd->add_option("--timeout", tf.timeout, "Request timeout in seconds");
  translate_cmd->add_option("--max-retries", tf.max_retries, "Retries for transient failures (3)");
  translate_cmd->add_option("--max-concurrency", tf.max_concurrency, "Requests in flight (4)");
  translate_cmd->add_option("--request-log", tf.request_log, "Append one JSON line per attempt");
  translate_cmd->add_option("--mock", tf.mock, "Use the mock backend: identity, reverse_words or noisy");
  translate_cmd->add_option("--mock-latency-ms", tf.mock_latency_ms, "Mock base latency per call (20)");
  translate_cmd->add_option("--mock-latency-per-word-us", tf.mock_latency_per_word_us,
                            "Mock latency per output word (1000)");
  translate_cmd->add_option("--utility-url", tf.utility_url, "Scoring service used as MBR utility");
  translate_cmd->add_flag("--utility-context", tf.utility_context, "Pass rolling context to the utility");

  EvaluateFlags ef;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score translation runs against references");
  evaluate_cmd->add_option("run", ef.run, "translate output directory or runs.jsonl")->required();
  evaluate_cmd->add_option("ref", ef.ref, "Reference corpus")->required();
  evaluate_cmd->add_option("--out", ef.out, "Report JSON path")->required();
  evaluate_cmd->add_option("--table", ef.table, "Also write the table here");
  evaluate_cmd->add_option("--scorer-url", ef.scorer_url, "Scoring service for COMET and d-COMET");
  evaluate_cmd->add_option("--window", ef.window, "SLIDE window in tokens (512)");
  evaluate_cmd->add_option("--stride", ef.stride, "SLIDE stride in tokens (256)");

  std::vector<std::string> storage = args;
  if (storage.empty()) storage.push_back("docmt");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitValidation;
  }

  try {
    if (*stats) return cmd_stats(stats_in, stats_json, out);
    if (*curate) return cmd_curate(cf, g, out, err);
    if (*augment) return cmd_augment(af, g, out, err);
    if (*format) return cmd_format(ff, g, out);
    if (*translate_cmd) return cmd_translate(tf, g, out, err);
    if (*evaluate_cmd) return cmd_evaluate(ef, g, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const ScorerError& e) {
    err << "scorer error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBackend;
  }
  err << app.help();
  return kExitValidation;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace docmt

#include "docmt/prompt.hpp"

#include "docmt/error.hpp"

namespace docmt {

namespace {

constexpr std::string_view kInstructionHead = "Translate the following source text from ";
constexpr std::string_view kContextHead = "Context:\n";
constexpr std::string_view kUserEndAssistant = "<|im_end|>\n<|im_start|>assistant\n";

void reject_markers(std::string_view field, std::string_view value) {
  if (value.find(kTurnStart) != std::string_view::npos || value.find(kTurnEnd) != std::string_view::npos)
    throw ValidationError(std::string(field) + " contains a chat turn marker");
}

}  // namespace

std::string to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::contextual:
      return "contextual";
    case PromptMode::doc2doc:
      return "doc2doc";
    case PromptMode::sentence:
      return "sentence";
  }
  return "sentence";
}

PromptMode prompt_mode_from_string(std::string_view s) {
  if (s == "contextual") return PromptMode::contextual;
  if (s == "doc2doc") return PromptMode::doc2doc;
  if (s == "sentence") return PromptMode::sentence;
  throw ValidationError("unknown prompt mode '" + std::string(s) + "'");
}

std::string Prompt::user_content() const {
  if (text.rfind(kUserStart, 0) != 0) throw ValidationError("prompt does not open a user turn");
  auto end = text.find(kUserEndAssistant);
  if (end == std::string::npos) throw ValidationError("prompt has no assistant turn");
  return text.substr(kUserStart.size(), end - kUserStart.size());
}

Prompt render(const ContextualExample& example, PromptMode mode, const LanguageRegistry& registry) {
  if (mode != PromptMode::contextual && !example.context.empty())
    throw ValidationError(to_string(mode) + " prompts take no context");
  if (example.source.empty()) throw ValidationError("empty source text");
  reject_markers("source", example.source);
  if (example.target) reject_markers("target", *example.target);
  for (const auto& p : example.context) {
    reject_markers("context source", p.src);
    reject_markers("context target", p.tgt);
  }
  const std::string& s = registry.display_name(example.src_lang.str());
  const std::string& t = registry.display_name(example.tgt_lang.str());

  Prompt prompt;
  prompt.mode = mode;
  std::string& out = prompt.text;
  out += kUserStart;
  if (!example.context.empty()) {
    out += kContextHead;
    for (const auto& p : example.context) {
      out += s;
      out += ": ";
      out += p.src;
      out += ' ';
      out += t;
      out += ": ";
      out += p.tgt;
      out += '\n';
    }
  }
  out += kInstructionHead;
  out += s;
  out += " into ";
  out += t;
  out += ".\n";
  out += s;
  out += ": ";
  out += example.source;
  out += ".\n";
  out += t;
  out += ':';
  out += kUserEndAssistant;
  if (example.target) {
    const std::size_t offset = out.size();
    out += *example.target;
    out += '.';
    out += kTurnEnd;
    prompt.target_span = ByteSpan{offset, out.size() - offset};
  }
  return prompt;
}

ParsedPrompt parse_user_content(std::string_view content) {
  auto fail = [](const char* what) { return ValidationError(std::string("unparseable prompt: ") + what); };
  ParsedPrompt parsed;
  std::size_t instr = 0;
  const bool has_context = content.rfind(kContextHead, 0) == 0;
  if (has_context) {
    auto pos = content.find(std::string("\n") + std::string(kInstructionHead));
    if (pos == std::string_view::npos) throw fail("missing instruction line");
    instr = pos + 1;
  } else if (content.rfind(kInstructionHead, 0) != 0) {
    throw fail("missing instruction line");
  }
  std::string_view line = content.substr(instr);
  auto eol = line.find('\n');
  if (eol == std::string_view::npos) throw fail("truncated instruction line");
  std::string_view langs = line.substr(kInstructionHead.size(), eol - kInstructionHead.size());
  auto into = langs.find(" into ");
  if (into == std::string_view::npos || langs.empty() || langs.back() != '.') throw fail("bad instruction line");
  parsed.src_name = std::string(langs.substr(0, into));
  parsed.tgt_name = std::string(langs.substr(into + 6, langs.size() - into - 7));

  const std::string src_prefix = parsed.src_name + ": ";
  const std::string tgt_infix = " " + parsed.tgt_name + ": ";
  if (has_context) {
    std::string_view block = content.substr(kContextHead.size(), instr - kContextHead.size());
    if (block.empty() || block.back() != '\n') throw fail("bad context block");
    block.remove_suffix(1);
    const std::string row_sep = "\n" + src_prefix;
    if (block.rfind(src_prefix, 0) != 0) throw fail("bad context row");
    block.remove_prefix(src_prefix.size());
    while (true) {
      auto next = block.find(row_sep);
      std::string_view row = block.substr(0, next);
      auto mid = row.find(tgt_infix);
      if (mid == std::string_view::npos) throw fail("bad context row");
      parsed.context.push_back({std::string(row.substr(0, mid)), std::string(row.substr(mid + tgt_infix.size()))});
      if (next == std::string_view::npos) break;
      block.remove_prefix(next + row_sep.size());
    }
  }

  std::string_view rest = line.substr(eol + 1);
  const std::string tail = ".\n" + parsed.tgt_name + ":";
  if (rest.rfind(src_prefix, 0) != 0 || rest.size() < src_prefix.size() + tail.size() ||
      rest.substr(rest.size() - tail.size()) != tail)
    throw fail("bad source line");
  parsed.source = std::string(rest.substr(src_prefix.size(), rest.size() - src_prefix.size() - tail.size()));
  return parsed;
}

ParsedPrompt parse_prompt_text(std::string_view text) {
  if (text.rfind(kUserStart, 0) != 0) throw ValidationError("unparseable prompt: no user turn");
  auto end = text.find(kUserEndAssistant);
  if (end == std::string_view::npos) throw ValidationError("unparseable prompt: no assistant turn");
  ParsedPrompt parsed = parse_user_content(text.substr(kUserStart.size(), end - kUserStart.size()));
  std::string_view answer = text.substr(end + kUserEndAssistant.size());
  if (!answer.empty()) {
    const std::string closing = std::string(".") + std::string(kTurnEnd);
    if (answer.size() < closing.size() || answer.substr(answer.size() - closing.size()) != closing)
      throw ValidationError("unparseable prompt: assistant turn not closed");
    parsed.target = std::string(answer.substr(0, answer.size() - closing.size()));
  }
  return parsed;
}

nlohmann::ordered_json TrainingRecord::to_json() const {
  nlohmann::ordered_json j;
  j["text"] = prompt.text;
  j["target_start"] = prompt.target_span ? prompt.target_span->offset : 0;
  j["target_len"] = prompt.target_span ? prompt.target_span->length : 0;
  j["doc_id"] = doc_id;
  j["chunk_index"] = chunk_index;
  j["mode"] = to_string(prompt.mode);
  j["src_lang"] = src_lang.str();
  j["tgt_lang"] = tgt_lang.str();
  return j;
}

TrainingRecord TrainingRecord::from_json(const nlohmann::json& j) {
  try {
    TrainingRecord r;
    r.prompt.text = j.at("text").get<std::string>();
    const auto start = j.at("target_start").get<std::size_t>();
    const auto len = j.at("target_len").get<std::size_t>();
    if (len > 0) {
      if (start + len > r.prompt.text.size()) throw ValidationError("training record span out of range");
      r.prompt.target_span = ByteSpan{start, len};
    }
    r.prompt.mode = prompt_mode_from_string(j.at("mode").get<std::string>());
    r.doc_id = j.at("doc_id").get<std::string>();
    r.chunk_index = j.at("chunk_index").get<std::size_t>();
    r.src_lang = LangCode::parse(j.at("src_lang").get<std::string>());
    r.tgt_lang = LangCode::parse(j.at("tgt_lang").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed training record: ") + e.what());
  }
}

TrainingRecord emit_training_record(const ContextualExample& example, PromptMode mode, std::string doc_id,
                                    std::size_t chunk_index) {
  if (!example.target || example.target->empty())
    throw ValidationError("training record for '" + doc_id + "' chunk " + std::to_string(chunk_index) +
                          " has no reference target");
  TrainingRecord rec;
  rec.prompt = render(example, mode);
  rec.doc_id = std::move(doc_id);
  rec.chunk_index = chunk_index;
  rec.src_lang = example.src_lang;
  rec.tgt_lang = example.tgt_lang;
  return rec;
}

nlohmann::ordered_json TrainingConfig::to_json() const {
  nlohmann::ordered_json j;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["lr"] = learning_rate;
  j["scheduler"] = lr_scheduler;
  j["warmup_steps"] = warmup_steps;
  j["weight_decay"] = weight_decay;
  j["optimizer"] = optimizer;
  j["beta1"] = adam_beta1;
  j["beta2"] = adam_beta2;
  j["eps"] = adam_epsilon;
  j["max_seq_len"] = max_seq_len;
  return j;
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  try {
    TrainingConfig c;
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("lr").get<double>();
    c.lr_scheduler = j.at("scheduler").get<std::string>();
    c.warmup_steps = j.at("warmup_steps").get<int>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.optimizer = j.at("optimizer").get<std::string>();
    c.adam_beta1 = j.at("beta1").get<double>();
    c.adam_beta2 = j.at("beta2").get<double>();
    c.adam_epsilon = j.at("eps").get<double>();
    c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed training config: ") + e.what());
  }
}

TrainingConfig export_training_config() { return TrainingConfig{}; }

}  // namespace docmt

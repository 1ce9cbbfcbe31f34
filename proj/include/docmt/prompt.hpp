#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "docmt/augmentation.hpp"

namespace docmt {

enum class PromptMode { contextual, doc2doc, sentence };

std::string to_string(PromptMode mode);
PromptMode prompt_mode_from_string(std::string_view s);

inline constexpr std::string_view kTurnStart = "<|im_start|>";
inline constexpr std::string_view kTurnEnd = "<|im_end|>";
inline constexpr std::string_view kUserStart = "<|im_start|>user\n";
inline constexpr std::string_view kAssistantStart = "<|im_start|>assistant\n";

struct ByteSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

// A chatml rendering. `text` always ends with the assistant-start marker
// sequence; when a target is present it is followed by "{target}." and the
// end-of-turn marker, and `target_span` covers exactly that suffix.
struct Prompt {
  std::string text;
  std::optional<ByteSpan> target_span;
  PromptMode mode = PromptMode::sentence;

  // The user turn body, i.e. what a chat-completion endpoint receives as the
  // user message.
  std::string user_content() const;
};

// Renders the instruction template:
//
//   <|im_start|>user
//   Context:                                  (contextual mode only)
//   {S}: {source_1} {T}: {target_1}           (one row per context pair)
//   Translate the following source text from {S} into {T}.
//   {S}: {source}.
//   {T}:<|im_end|>
//   <|im_start|>assistant
//   {target}.<|im_end|>                       (when a target is given)
//
// {S}/{T} are English language names. The contextual mode emits the Context
// block only when there is at least one pair. Throws ValidationError for
// unknown languages or a non-empty context in doc2doc/sentence mode.
Prompt render(const ContextualExample& example, PromptMode mode,
              const LanguageRegistry& registry = LanguageRegistry::standard());

// Inverse of render for the user turn / full training text. Exact as long as
// no text field contains a template marker line.
struct ParsedPrompt {
  std::string src_name;
  std::string tgt_name;
  Context context;
  std::string source;
  std::optional<std::string> target;
};
ParsedPrompt parse_user_content(std::string_view content);
ParsedPrompt parse_prompt_text(std::string_view text);

struct TrainingRecord {
  Prompt prompt;
  std::string doc_id;
  std::size_t chunk_index = 0;
  LangCode src_lang;
  LangCode tgt_lang;

  nlohmann::ordered_json to_json() const;
  static TrainingRecord from_json(const nlohmann::json& j);
};

// Requires a non-empty reference target.
TrainingRecord emit_training_record(const ContextualExample& example, PromptMode mode, std::string doc_id = {},
                                    std::size_t chunk_index = 0);

// Fine-tuning hyperparameters emitted next to the training records. JSON keys:
// batch_size, epochs, lr, scheduler, warmup_steps, weight_decay, optimizer,
// beta1, beta2, eps, max_seq_len.
struct TrainingConfig {
  int batch_size = 32;
  int epochs = 2;
  double learning_rate = 7e-6;
  std::string lr_scheduler = "cosine";
  int warmup_steps = 125;
  double weight_decay = 0.01;
  std::string optimizer = "adam";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t max_seq_len = kDefaultTokenBudget;

  nlohmann::ordered_json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

TrainingConfig export_training_config();

}  // namespace docmt

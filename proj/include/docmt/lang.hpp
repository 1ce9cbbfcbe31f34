#pragma once

#include <map>
#include <string>
#include <string_view>

namespace docmt {

// Two-letter language codes known to the toolkit, with English display names
// used by the instruction templates.
class LanguageRegistry {
 public:
  // en plus de, fr, it, ko, nl, zh, ru, pt, es.
  static const LanguageRegistry& standard();

  LanguageRegistry() = default;
  void add(std::string code, std::string display_name);
  bool contains(std::string_view code) const;
  // Throws ValidationError for unknown codes.
  const std::string& display_name(std::string_view code) const;

 private:
  std::map<std::string, std::string, std::less<>> names_;
};

class LangCode {
 public:
  LangCode() = default;

  // Validates shape (2 lowercase ASCII letters) and registry membership.
  static LangCode parse(std::string_view code,
                        const LanguageRegistry& registry = LanguageRegistry::standard());

  const std::string& str() const { return code_; }
  const std::string& display_name(
      const LanguageRegistry& registry = LanguageRegistry::standard()) const {
    return registry.display_name(code_);
  }
  bool is_english() const { return code_ == "en"; }

  friend bool operator==(const LangCode&, const LangCode&) = default;
  friend auto operator<=>(const LangCode&, const LangCode&) = default;

 private:
  explicit LangCode(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

}  // namespace docmt

#include "docmt/lang.hpp"

#include "docmt/error.hpp"

namespace docmt {

const LanguageRegistry& LanguageRegistry::standard() {
  static const LanguageRegistry registry = [] {
    LanguageRegistry r;
    r.add("en", "English");
    r.add("de", "German");
    r.add("fr", "French");
    r.add("it", "Italian");
    r.add("ko", "Korean");
    r.add("nl", "Dutch");
    r.add("zh", "Chinese");
    r.add("ru", "Russian");
    r.add("pt", "Portuguese");
    r.add("es", "Spanish");
    return r;
  }();
  return registry;
}

void LanguageRegistry::add(std::string code, std::string display_name) {
  names_.insert_or_assign(std::move(code), std::move(display_name));
}

bool LanguageRegistry::contains(std::string_view code) const { return names_.find(code) != names_.end(); }

const std::string& LanguageRegistry::display_name(std::string_view code) const {
  auto it = names_.find(code);
  if (it == names_.end()) throw ValidationError("unknown language code '" + std::string(code) + "'");
  return it->second;
}

LangCode LangCode::parse(std::string_view code, const LanguageRegistry& registry) {
  bool shape_ok = code.size() == 2 && code[0] >= 'a' && code[0] <= 'z' && code[1] >= 'a' && code[1] <= 'z';
  if (!shape_ok) throw ValidationError("malformed language code '" + std::string(code) + "'");
  if (!registry.contains(code)) throw ValidationError("unknown language code '" + std::string(code) + "'");
  return LangCode(std::string(code));
}

}  // namespace docmt

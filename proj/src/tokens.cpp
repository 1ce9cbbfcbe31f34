#include "docmt/tokens.hpp"

#include <cmath>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

WhitespaceTokenCounter::WhitespaceTokenCounter(double multiplier) : multiplier_(multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier))
    throw ValidationError("token multiplier must be positive");
}

std::size_t WhitespaceTokenCounter::count(std::string_view text) const {
  const auto words = static_cast<double>(text::count_words(text));
  return static_cast<std::size_t>(std::llround(words * multiplier_));
}

const TokenCounter& default_token_counter() {
  static const WhitespaceTokenCounter counter;
  return counter;
}

}  // namespace docmt

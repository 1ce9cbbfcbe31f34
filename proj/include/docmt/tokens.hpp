#pragma once

#include <cstddef>
#include <string_view>

namespace docmt {

// Token-count estimator. Exact counts are tokenizer-specific, so callers
// inject whatever matches their model.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

// round(whitespace words x multiplier). count("") == 0.
class WhitespaceTokenCounter final : public TokenCounter {
 public:
  explicit WhitespaceTokenCounter(double multiplier = 1.3);
  std::size_t count(std::string_view text) const override;
  double multiplier() const { return multiplier_; }

 private:
  double multiplier_;
};

const TokenCounter& default_token_counter();

inline constexpr std::size_t kDefaultTokenBudget = 32768;

}  // namespace docmt

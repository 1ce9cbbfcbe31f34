#pragma once

#include <string>
#include <vector>

namespace docmt {

// A preceding (source chunk, target chunk) pair carried as context.
struct ContextPair {
  std::string src;
  std::string tgt;
  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

using Context = std::vector<ContextPair>;

}  // namespace docmt

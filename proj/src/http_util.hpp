#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "docmt/error.hpp"

namespace docmt::detail {

// "http://host:8000/v1" -> {"http://host:8000", "/v1"}
inline std::pair<std::string, std::string> split_base_url(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) throw ValidationError("base URL needs a scheme: " + std::string(url));
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), ""};
  std::string path(url.substr(slash));
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {std::string(url.substr(0, slash)), path};
}

}  // namespace docmt::detail

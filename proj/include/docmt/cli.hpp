#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace docmt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBackend = 2;

// Entry point of the `docmt` executable. `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace docmt

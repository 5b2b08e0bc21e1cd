#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace densepoly::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

/// Entry point of the `densepoly` tool. args[0] is the program name.
/// Reports without a --report path go to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace densepoly::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdepth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point shared by the `cdepth` binary and the in-process tests.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdepth::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace layerscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

/// Entry point behind the `layerscope` executable. Every successful command
/// writes `<out>/manifest.json` listing the artifacts it produced.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace layerscope::cli

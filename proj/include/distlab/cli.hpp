#pragma once

#include <string>
#include <vector>

namespace distlab {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the distlab tool. Returns 0 on success, 1 on a config
// error, 2 on a runtime error.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

}  // namespace distlab

#pragma once

#include <string>
#include <vector>

namespace hpm {
namespace cli {

// Entry point shared by the binary and the in-process tests.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace cli
}  // namespace hpm

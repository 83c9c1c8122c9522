#pragma once

#include <stdexcept>
#include <string>

namespace hpm {

// Bad user input or violated precondition. The CLI maps this to exit code 1;
// everything else that escapes is a runtime failure (exit code 2).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace hpm

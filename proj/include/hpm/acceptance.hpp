#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpm {
namespace acceptance {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_criteria();

// Prints one pass/fail line per criterion; true iff everything passed.
bool run_all(std::ostream& out);

}  // namespace acceptance
}  // namespace hpm

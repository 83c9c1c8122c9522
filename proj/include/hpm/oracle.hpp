#pragma once

#include <functional>
#include <vector>

#include "hpm/dataset.hpp"
#include "hpm/linear_model.hpp"
#include "hpm/rules.hpp"
#include "hpm/ruleset_model.hpp"

namespace hpm {
namespace oracle {

// Independent brute-force references. Deliberately slow and simple; the CLI
// `verify` command and the test suites are the customers.

struct BruteForceResult {
  RuleSetPair pair;
  double objective = 0.0;
};

// Exact argmin of the rule-set objective over all subset pairs with at most
// max_rules_per_side rules per side; ties resolved by the lexicographically
// smallest (positive mask, negative mask) encoding. Throws if the subset
// space exceeds 10^6 pairs.
BruteForceResult brute_force_ruleset(const CandidatePool& pool,
                                     const BinaryDataset& d, double alpha1,
                                     double alpha2,
                                     std::size_t max_rules_per_side);

struct SimulationResult {
  double error = 0.0;
  double transparency = 0.0;
};

// Row-by-row application of the routing semantics; the ground truth the
// closed-form error and transparency are checked against.
SimulationResult simulate_process(const RuleSetPair& pair,
                                  const BinaryDataset& d);
SimulationResult simulate_process(const HybridLinearModel& m, const Dataset& d);

// Central differences per coordinate.
std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& fn,
    std::vector<double> point, double h);

struct GridWindow {
  double w_lo = -2.0;
  double w_hi = 2.0;
  double theta_lo = -2.0;
  double theta_hi = 2.0;
};

struct GridResult {
  double objective = 0.0;
  std::vector<double> w;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
};

// Dense-grid minimum of F over (w, theta_plus, theta_minus) with
// theta_plus >= theta_minus; an upper bound on F*. `resolution` counts
// intervals per axis, so doubling it nests the grids. At most 2 features.
GridResult grid_minimize_linear(const Dataset& d, double alpha1, double alpha2,
                                const LossSpec& spec, std::size_t resolution,
                                const GridWindow& window = {});

}  // namespace oracle
}  // namespace hpm

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpm/bitvector.hpp"
#include "hpm/dataset.hpp"
#include "hpm/rng.hpp"
#include "hpm/rules.hpp"

namespace hpm {

enum class Route { positive_rules, negative_rules, linear, blackbox };

std::string route_name(Route r);

// Positive rules outrank negative rules; anything uncovered goes to the
// black-box.
struct RuleSetPair {
  std::vector<Rule> positive;
  std::vector<Rule> negative;

  bool empty() const { return positive.empty() && negative.empty(); }
  friend bool operator==(const RuleSetPair&, const RuleSetPair&) = default;
};

struct HybridRuleSetModel {
  std::vector<Condition> condition_schema;  // rules index into this list
  RuleSetPair pair;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double training_objective = 0.0;
};

// Counting core shared by the closed-form metrics, the search and the
// brute-force oracle so that identical pairs produce bit-identical objectives.
struct PairCounts {
  std::size_t errors = 0;
  std::size_t covered = 0;
  std::size_t conditions = 0;
};

PairCounts count_pair(const BitVector& pos_cover, const BitVector& neg_cover,
                      const BinaryDataset& d);

inline double objective_value(const PairCounts& c, std::size_t n, double alpha1,
                              double alpha2) {
  const double nd = static_cast<double>(n);
  return static_cast<double>(c.errors) / nd +
         alpha1 * static_cast<double>(c.conditions) -
         alpha2 * (static_cast<double>(c.covered) / nd);
}

double misclassification_error(const RuleSetPair& p, const BinaryDataset& d);
double transparency(const RuleSetPair& p, const BinaryDataset& d);
std::size_t complexity(const RuleSetPair& p);
double objective(const RuleSetPair& p, const BinaryDataset& d, double alpha1,
                 double alpha2);

// Routing over a BinaryDataset row with an explicit black-box vote.
std::pair<int, Route> predict(const RuleSetPair& p, const BinaryDataset& d,
                              std::size_t row, int blackbox_label);

// Evaluates a trained model on raw data through its stored condition
// descriptors; resolves the schema once at construction.
class RulePredictor {
 public:
  RulePredictor(const HybridRuleSetModel& model, const Dataset& data);
  std::pair<int, Route> predict(std::size_t row) const;
  std::size_t n() const { return n_; }

 private:
  BitVector pos_cover_;
  BitVector neg_cover_;
  const std::vector<int>* blackbox_;
  std::size_t n_;
};

struct RuleSearchConfig {
  std::size_t iterations = 5000;   // T
  double base_temperature = 0.01;  // C0
  std::size_t restarts = 3;
  double exploration = 0.1;        // probability of a uniform rule choice
};

struct SearchTrace {
  // Best objective seen up to each step, one series per restart. Entry 0 is
  // the empty-pair objective; entry t is lambda after iteration t.
  std::vector<std::vector<double>> lambda;
};

// One annealing chain over a fixed candidate pool.
class RuleSearch {
 public:
  RuleSearch(const BinaryDataset& d, const CandidatePool& pool, double alpha1,
             double alpha2, const RuleSearchConfig& cfg, std::uint64_t seed);

  // Draw one neighbor of the current pair; consumes randomness but leaves the
  // chain state unchanged. Returns the current pair when nothing is feasible.
  RuleSetPair propose();

  void step();
  void run();

  double lambda_best() const { return lambda_best_; }
  double current_objective() const { return lambda_current_; }
  const std::vector<double>& lambda_trace() const { return trace_; }
  RuleSetPair current_pair() const;
  RuleSetPair best_pair() const;

  // Test hooks: force a chain state / best-so-far objective.
  void set_current(const RuleSetPair& pair);
  void set_lambda_best(double v) { lambda_best_ = v; }

 private:
  enum class ActionKind { remove_rule, add_rule, fix_example };
  struct Action {
    bool positive_side = false;
    bool add = false;
    std::uint32_t pool_index = 0;
  };

  const std::vector<PooledRule>& side_pool(bool positive) const;
  std::optional<Action> try_remove();
  std::optional<Action> try_add();
  std::optional<Action> try_fix();
  std::optional<Action> propose_action();
  std::uint32_t pick_greedy_or_random(const std::vector<std::uint32_t>& ids,
                                      bool positive, bool highest);
  double evaluate_action(const Action& a, PairCounts& counts);
  void apply_action(const Action& a, double new_objective);
  void rebuild_side_cover(bool positive);

  const BinaryDataset& data_;
  const CandidatePool& pool_;
  double alpha1_;
  double alpha2_;
  RuleSearchConfig cfg_;
  Rng rng_;

  std::vector<std::uint32_t> selected_pos_;  // sorted pool indices
  std::vector<std::uint32_t> selected_neg_;
  std::vector<char> in_pos_;
  std::vector<char> in_neg_;
  BitVector pos_cover_;
  BitVector neg_cover_;
  std::size_t conditions_ = 0;

  double lambda_current_ = 0.0;
  double lambda_best_ = 0.0;
  std::vector<std::uint32_t> best_pos_;
  std::vector<std::uint32_t> best_neg_;
  std::size_t t_ = 0;
  std::vector<double> trace_;
  BitVector scratch_;
};

// Full training run: `restarts` independent chains from the empty pair, best
// objective wins (ties by restart index). Deterministic for a fixed seed.
HybridRuleSetModel train_ruleset(const BinaryDataset& d,
                                 const CandidatePool& pool, double alpha1,
                                 double alpha2, const RuleSearchConfig& cfg,
                                 std::uint64_t seed,
                                 SearchTrace* trace = nullptr);

}  // namespace hpm

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hpm/bitvector.hpp"
#include "hpm/dataset.hpp"

namespace hpm {

// Conjunction of conditions, stored as strictly increasing indices into a
// BinaryDataset's condition list.
struct Rule {
  std::vector<std::uint32_t> condition_ids;

  std::size_t length() const { return condition_ids.size(); }
  std::string to_string(const std::vector<Condition>& schema) const;

  friend bool operator==(const Rule&, const Rule&) = default;
  friend auto operator<=>(const Rule&, const Rule&) = default;
};

// Candidate rule plus the caches the search needs.
struct PooledRule {
  Rule rule;
  BitVector cover;         // rows covered, on the mining dataset
  std::size_t support = 0; // cover.count()
  std::size_t class_hits = 0;  // covered rows whose label matches the side
  double precision = 0.0;      // class_hits / support (0 when support is 0)
};

struct CandidatePool {
  std::vector<PooledRule> positive;  // rules proposed as "predict +1"
  std::vector<PooledRule> negative;  // rules proposed as "predict -1"
  std::size_t min_support_pos = 0;
  std::size_t min_support_neg = 0;
};

bool covers_rule(const Rule& r, const BinaryDataset& d, std::size_t row);
bool covers_set(const std::vector<Rule>& rules, const BinaryDataset& d,
                std::size_t row);

// Raw-instance coverage; throws ValidationError on unknown feature or kind
// mismatch.
bool covers_rule(const std::vector<Condition>& conditions, const Dataset& d,
                 std::size_t row);

BitVector rule_cover(const Rule& r, const BinaryDataset& d);

std::size_t support(const std::vector<Rule>& rules, const BinaryDataset& d);

// Minimum supports below which a rule can be discarded without losing any
// optimal model: (ceil(n*alpha1), ceil(n*alpha1/(1-alpha2))).
std::pair<std::size_t, std::size_t> min_support_bounds(std::size_t n,
                                                       double alpha1,
                                                       double alpha2);

// Fraction of covered instances whose true label equals cls; 0 on support 0.
double precision(const Rule& r, const BinaryDataset& d, int cls);

// Frequent-itemset growth over condition bits, run per class: positive rules
// are mined on positive-labeled rows, negative rules on negative-labeled
// rows, with the class-row support floor max(bound, 1). Each side holds at
// most max_rules_per_side rules (highest precision kept); output is in
// lexicographic condition-index order.
CandidatePool mine_candidates(const BinaryDataset& d, std::size_t max_len,
                              double alpha1, double alpha2,
                              std::size_t max_rules_per_side = 5000);

// Every rule of length <= max_len, no support filtering; both sides carry the
// same rules with side-specific precision. Test/oracle helper.
CandidatePool enumerate_rule_universe(const BinaryDataset& d,
                                      std::size_t max_len);

// One rule per line with support and precision annotations.
void dump_pool(const CandidatePool& pool, const std::vector<Condition>& schema,
               std::ostream& out);

}  // namespace hpm

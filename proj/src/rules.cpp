#include "hpm/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hpm/errors.hpp"

namespace hpm {

std::string Rule::to_string(const std::vector<Condition>& schema) const {
  std::string s;
  for (std::size_t i = 0; i < condition_ids.size(); ++i) {
    if (i > 0) s += " AND ";
    s += schema[condition_ids[i]].to_string();
  }
  return s;
}

bool covers_rule(const Rule& r, const BinaryDataset& d, std::size_t row) {
  for (std::uint32_t c : r.condition_ids) {
    if (c >= d.columns.size())
      throw ValidationError("rule references unknown condition index " +
                            std::to_string(c));
    if (!d.columns[c].test(row)) return false;
  }
  return true;
}

bool covers_set(const std::vector<Rule>& rules, const BinaryDataset& d,
                std::size_t row) {
  for (const Rule& r : rules) {
    if (covers_rule(r, d, row)) return true;
  }
  return false;
}

bool covers_rule(const std::vector<Condition>& conditions, const Dataset& d,
                 std::size_t row) {
  for (const Condition& c : conditions) {
    std::size_t idx = d.feature_index(c.feature);
    if (!c.evaluate(d, idx, row)) return false;
  }
  return true;
}

BitVector rule_cover(const Rule& r, const BinaryDataset& d) {
  if (r.condition_ids.empty())
    throw ValidationError("rule must have at least one condition");
  BitVector cover = d.columns[r.condition_ids[0]];
  for (std::size_t i = 1; i < r.condition_ids.size(); ++i)
    cover.and_with(d.columns[r.condition_ids[i]]);
  return cover;
}

std::size_t support(const std::vector<Rule>& rules, const BinaryDataset& d) {
  if (rules.empty()) return 0;
  BitVector u(d.n);
  for (const Rule& r : rules) u.or_with(rule_cover(r, d));
  return u.count();
}

std::pair<std::size_t, std::size_t> min_support_bounds(std::size_t n,
                                                       double alpha1,
                                                       double alpha2) {
  if (alpha1 < 0.0) throw ValidationError("alpha1 must be non-negative");
  if (alpha2 < 0.0 || alpha2 >= 1.0)
    throw ValidationError("alpha2 must lie in [0,1) for the support bound");
  auto ceil_count = [](double x) -> std::size_t {
    if (x <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
  };
  const double nd = static_cast<double>(n);
  std::size_t pos = ceil_count(nd * alpha1);
  std::size_t neg = ceil_count(nd * alpha1 / (1.0 - alpha2));
  return {pos, neg};
}

double precision(const Rule& r, const BinaryDataset& d, int cls) {
  BitVector cover = rule_cover(r, d);
  std::size_t sup = cover.count();
  if (sup == 0) return 0.0;
  std::size_t hits = cover.count_and(cls == 1 ? d.label_pos : d.label_neg);
  return static_cast<double>(hits) / static_cast<double>(sup);
}

namespace {

// Depth-first pattern growth in increasing condition order; emits itemsets in
// lexicographic order. class_floor == 0 means no pruning (full universe).
void grow(const BinaryDataset& d, const BitVector& class_mask,
          std::size_t class_floor, std::size_t max_len,
          std::vector<std::uint32_t>& prefix, const BitVector* prefix_cover,
          std::vector<PooledRule>& out) {
  const auto m = static_cast<std::uint32_t>(d.columns.size());
  const std::uint32_t start = prefix.empty() ? 0 : prefix.back() + 1;
  for (std::uint32_t j = start; j < m; ++j) {
    BitVector cover;
    if (prefix_cover == nullptr) {
      cover = d.columns[j];
    } else {
      cover.assign_and(*prefix_cover, d.columns[j]);
    }
    const std::size_t class_hits = cover.count_and(class_mask);
    if (class_hits < class_floor) continue;  // anti-monotone on class rows
    prefix.push_back(j);
    PooledRule pr;
    pr.rule.condition_ids = prefix;
    pr.support = cover.count();
    pr.class_hits = class_hits;
    pr.precision = pr.support == 0
                       ? 0.0
                       : static_cast<double>(class_hits) /
                             static_cast<double>(pr.support);
    pr.cover = cover;
    out.push_back(std::move(pr));
    if (prefix.size() < max_len)
      grow(d, class_mask, class_floor, max_len, prefix, &cover, out);
    prefix.pop_back();
  }
}

void cap_pool(std::vector<PooledRule>& rules, std::size_t cap) {
  if (rules.size() <= cap) return;
  std::vector<std::size_t> idx(rules.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].precision > rules[b].precision;
  });
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());  // back to lexicographic rule order
  std::vector<PooledRule> kept;
  kept.reserve(cap);
  for (std::size_t i : idx) kept.push_back(std::move(rules[i]));
  rules = std::move(kept);
}

}  // namespace

CandidatePool mine_candidates(const BinaryDataset& d, std::size_t max_len,
                              double alpha1, double alpha2,
                              std::size_t max_rules_per_side) {
  if (max_len < 1) throw ValidationError("max rule length must be >= 1");
  auto [pos_bound, neg_bound] = min_support_bounds(d.n, alpha1, alpha2);
  CandidatePool pool;
  pool.min_support_pos = pos_bound;
  pool.min_support_neg = neg_bound;

  std::vector<std::uint32_t> prefix;
  grow(d, d.label_pos, std::max<std::size_t>(pos_bound, 1), max_len, prefix,
       nullptr, pool.positive);
  grow(d, d.label_neg, std::max<std::size_t>(neg_bound, 1), max_len, prefix,
       nullptr, pool.negative);

  cap_pool(pool.positive, max_rules_per_side);
  cap_pool(pool.negative, max_rules_per_side);
  return pool;
}

CandidatePool enumerate_rule_universe(const BinaryDataset& d,
                                      std::size_t max_len) {
  CandidatePool pool;
  std::vector<std::uint32_t> prefix;
  grow(d, d.label_pos, 0, max_len, prefix, nullptr, pool.positive);
  prefix.clear();
  grow(d, d.label_neg, 0, max_len, prefix, nullptr, pool.negative);
  return pool;
}

void dump_pool(const CandidatePool& pool, const std::vector<Condition>& schema,
               std::ostream& out) {
  auto dump_side = [&](const std::vector<PooledRule>& rules,
                       const char* side) {
    for (const PooledRule& pr : rules) {
      out << side << ": " << pr.rule.to_string(schema) << "  [support="
          << pr.support << " precision=" << pr.precision << "]\n";
    }
  };
  dump_side(pool.positive, "+");
  dump_side(pool.negative, "-");
}

}  // namespace hpm

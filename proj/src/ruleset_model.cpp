#include "hpm/ruleset_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "hpm/errors.hpp"

namespace hpm {

std::string route_name(Route r) {
  switch (r) {
    case Route::positive_rules: return "POSITIVE_RULES";
    case Route::negative_rules: return "NEGATIVE_RULES";
    case Route::linear: return "LINEAR";
    case Route::blackbox: return "BLACKBOX";
  }
  return "?";
}

PairCounts count_pair(const BitVector& pos_cover, const BitVector& neg_cover,
                      const BinaryDataset& d) {
  PairCounts c;
  const auto& p = pos_cover.words();
  const auto& m = neg_cover.words();
  const auto& y = d.label_pos.words();
  const auto& b = d.blackbox_pos.words();
  std::size_t errors = 0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // false positives from R+, true positives lost to R-, black-box
    // disagreements on uncovered rows
    const std::uint64_t e = (p[i] & ~y[i]) | (~p[i] & m[i] & y[i]) |
                            (~p[i] & ~m[i] & (y[i] ^ b[i]));
    errors += static_cast<std::size_t>(std::popcount(e));
    covered += static_cast<std::size_t>(std::popcount(p[i] | m[i]));
  }
  c.errors = errors;
  c.covered = covered;
  return c;
}

namespace {

PairCounts counts_of_pair(const RuleSetPair& pair, const BinaryDataset& d) {
  BitVector pos(d.n);
  BitVector neg(d.n);
  for (const Rule& r : pair.positive) pos.or_with(rule_cover(r, d));
  for (const Rule& r : pair.negative) neg.or_with(rule_cover(r, d));
  PairCounts c = count_pair(pos, neg, d);
  c.conditions = complexity(pair);
  return c;
}

}  // namespace

double misclassification_error(const RuleSetPair& p, const BinaryDataset& d) {
  return static_cast<double>(counts_of_pair(p, d).errors) /
         static_cast<double>(d.n);
}

double transparency(const RuleSetPair& p, const BinaryDataset& d) {
  return static_cast<double>(counts_of_pair(p, d).covered) /
         static_cast<double>(d.n);
}

std::size_t complexity(const RuleSetPair& p) {
  std::size_t total = 0;
  for (const Rule& r : p.positive) total += r.length();
  for (const Rule& r : p.negative) total += r.length();
  return total;
}

double objective(const RuleSetPair& p, const BinaryDataset& d, double alpha1,
                 double alpha2) {
  if (alpha1 < 0.0 || alpha2 < 0.0)
    throw ValidationError("alpha1 and alpha2 must be non-negative");
  return objective_value(counts_of_pair(p, d), d.n, alpha1, alpha2);
}

std::pair<int, Route> predict(const RuleSetPair& p, const BinaryDataset& d,
                              std::size_t row, int blackbox_label) {
  if (covers_set(p.positive, d, row)) return {1, Route::positive_rules};
  if (covers_set(p.negative, d, row)) return {-1, Route::negative_rules};
  return {blackbox_label, Route::blackbox};
}

RulePredictor::RulePredictor(const HybridRuleSetModel& model,
                             const Dataset& data)
    : pos_cover_(data.n),
      neg_cover_(data.n),
      blackbox_(&data.blackbox_labels),
      n_(data.n) {
  struct Resolved {
    const Condition* cond;
    std::size_t feature;
  };
  auto add_rules = [&](const std::vector<Rule>& rules, BitVector& cover) {
    for (const Rule& r : rules) {
      std::vector<Resolved> conds;
      conds.reserve(r.condition_ids.size());
      for (std::uint32_t id : r.condition_ids) {
        if (id >= model.condition_schema.size())
          throw ValidationError("model rule references missing condition " +
                                std::to_string(id));
        const Condition& c = model.condition_schema[id];
        conds.push_back({&c, data.feature_index(c.feature)});
      }
      for (std::size_t row = 0; row < data.n; ++row) {
        bool all = true;
        for (const Resolved& rc : conds) {
          if (!rc.cond->evaluate(data, rc.feature, row)) {
            all = false;
            break;
          }
        }
        if (all) cover.set(row);
      }
    }
  };
  add_rules(model.pair.positive, pos_cover_);
  add_rules(model.pair.negative, neg_cover_);
}

std::pair<int, Route> RulePredictor::predict(std::size_t row) const {
  if (pos_cover_.test(row)) return {1, Route::positive_rules};
  if (neg_cover_.test(row)) return {-1, Route::negative_rules};
  return {(*blackbox_)[row], Route::blackbox};
}

RuleSearch::RuleSearch(const BinaryDataset& d, const CandidatePool& pool,
                       double alpha1, double alpha2,
                       const RuleSearchConfig& cfg, std::uint64_t seed)
    : data_(d),
      pool_(pool),
      alpha1_(alpha1),
      alpha2_(alpha2),
      cfg_(cfg),
      rng_(seed),
      in_pos_(pool.positive.size(), 0),
      in_neg_(pool.negative.size(), 0),
      pos_cover_(d.n),
      neg_cover_(d.n),
      scratch_(d.n) {
  if (cfg_.iterations < 1) throw ValidationError("iterations must be >= 1");
  if (!(cfg_.base_temperature > 0.0))
    throw ValidationError("base temperature must be positive");
  if (alpha1_ < 0.0 || alpha2_ < 0.0)
    throw ValidationError("alpha1 and alpha2 must be non-negative");
  PairCounts c = count_pair(pos_cover_, neg_cover_, data_);
  lambda_current_ = objective_value(c, data_.n, alpha1_, alpha2_);
  lambda_best_ = lambda_current_;
  trace_.push_back(lambda_best_);
}

const std::vector<PooledRule>& RuleSearch::side_pool(bool positive) const {
  return positive ? pool_.positive : pool_.negative;
}

std::uint32_t RuleSearch::pick_greedy_or_random(
    const std::vector<std::uint32_t>& ids, bool positive, bool highest) {
  if (rng_.bernoulli(cfg_.exploration))
    return ids[rng_.below(ids.size())];
  const auto& pool = side_pool(positive);
  std::uint32_t best = ids[0];
  double best_p = pool[best].precision;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    double p = pool[ids[i]].precision;
    if (highest ? p > best_p : p < best_p) {
      best = ids[i];
      best_p = p;
    }
  }
  return best;
}

std::optional<RuleSearch::Action> RuleSearch::try_remove() {
  const bool has_pos = !selected_pos_.empty();
  const bool has_neg = !selected_neg_.empty();
  if (!has_pos && !has_neg) return std::nullopt;
  bool positive = (has_pos && has_neg) ? rng_.below(2) == 0 : has_pos;
  const auto& sel = positive ? selected_pos_ : selected_neg_;
  // the weakest rule is the best removal
  return Action{positive, false, pick_greedy_or_random(sel, positive, false)};
}

std::optional<RuleSearch::Action> RuleSearch::try_add() {
  auto candidates = [&](bool positive) {
    std::vector<std::uint32_t> ids;
    const auto& flags = positive ? in_pos_ : in_neg_;
    for (std::uint32_t i = 0; i < flags.size(); ++i)
      if (!flags[i]) ids.push_back(i);
    return ids;
  };
  std::vector<std::uint32_t> pos = candidates(true);
  std::vector<std::uint32_t> neg = candidates(false);
  if (pos.empty() && neg.empty()) return std::nullopt;
  bool positive = (!pos.empty() && !neg.empty()) ? rng_.below(2) == 0
                                                 : !pos.empty();
  const auto& ids = positive ? pos : neg;
  return Action{positive, true, pick_greedy_or_random(ids, positive, true)};
}

std::optional<RuleSearch::Action> RuleSearch::try_fix() {
  // misclassified rows of the current hybrid
  BitVector mis(data_.n);
  {
    const auto& p = pos_cover_.words();
    const auto& m = neg_cover_.words();
    const auto& y = data_.label_pos.words();
    const auto& b = data_.blackbox_pos.words();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::uint64_t e = (p[i] & ~y[i]) | (~p[i] & m[i] & y[i]) |
                              (~p[i] & ~m[i] & (y[i] ^ b[i]));
      if (e) {
        for (std::size_t bit = 0; bit < 64; ++bit)
          if ((e >> bit) & 1u) mis.set(i * 64 + bit);
      }
    }
  }
  const std::size_t total = mis.count();
  if (total == 0) return std::nullopt;
  const std::size_t row = mis.select(rng_.below(total));

  if (pos_cover_.test(row)) {
    // a negative example wrongly captured: drop a covering positive rule
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i : selected_pos_)
      if (pool_.positive[i].cover.test(row)) ids.push_back(i);
    return Action{true, false, pick_greedy_or_random(ids, true, false)};
  }
  if (neg_cover_.test(row)) {
    // a positive example captured by the negative side: either promote it
    // with a covering positive rule or drop the covering negative rule
    if (rng_.below(2) == 0) {
      std::vector<std::uint32_t> ids;
      for (std::uint32_t i = 0; i < pool_.positive.size(); ++i)
        if (!in_pos_[i] && pool_.positive[i].cover.test(row)) ids.push_back(i);
      if (!ids.empty())
        return Action{true, true, pick_greedy_or_random(ids, true, true)};
    }
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i : selected_neg_)
      if (pool_.negative[i].cover.test(row)) ids.push_back(i);
    return Action{false, false, pick_greedy_or_random(ids, false, false)};
  }
  // uncovered and the black-box is wrong: cover it on the label's side
  const bool positive = data_.labels[row] == 1;
  const auto& pool = side_pool(positive);
  const auto& flags = positive ? in_pos_ : in_neg_;
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < pool.size(); ++i)
    if (!flags[i] && pool[i].cover.test(row)) ids.push_back(i);
  if (ids.empty()) return std::nullopt;
  return Action{positive, true, pick_greedy_or_random(ids, positive, true)};
}

std::optional<RuleSearch::Action> RuleSearch::propose_action() {
  bool size_violated = false;
  if (alpha1_ > 0.0) {
    const double bound = (lambda_best_ + alpha2_) / alpha1_;
    size_violated = static_cast<double>(conditions_) > bound;
  }
  bool support_violated = false;
  if (alpha2_ > 0.0) {
    const double bound =
        static_cast<double>(data_.n) * (alpha1_ - lambda_best_) / alpha2_;
    if (bound > 0.0) {
      const std::size_t covered = pos_cover_.count_or(neg_cover_);
      support_violated = static_cast<double>(covered) < bound;
    }
  }

  std::vector<ActionKind> remaining;
  if (size_violated) {
    if (auto a = try_remove()) return a;
    remaining = {ActionKind::add_rule, ActionKind::fix_example};
  } else if (support_violated) {
    if (auto a = try_add()) return a;
    remaining = {ActionKind::remove_rule, ActionKind::fix_example};
  } else {
    remaining = {ActionKind::remove_rule, ActionKind::add_rule,
                 ActionKind::fix_example};
  }
  while (!remaining.empty()) {
    const std::size_t i = rng_.below(remaining.size());
    const ActionKind kind = remaining[i];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
    std::optional<Action> a;
    switch (kind) {
      case ActionKind::remove_rule: a = try_remove(); break;
      case ActionKind::add_rule: a = try_add(); break;
      case ActionKind::fix_example: a = try_fix(); break;
    }
    if (a) return a;
  }
  return std::nullopt;
}

double RuleSearch::evaluate_action(const Action& a, PairCounts& counts) {
  const PooledRule& pr = side_pool(a.positive_side)[a.pool_index];
  if (a.add) {
    scratch_ = a.positive_side ? pos_cover_ : neg_cover_;
    scratch_.or_with(pr.cover);
    counts = a.positive_side ? count_pair(scratch_, neg_cover_, data_)
                             : count_pair(pos_cover_, scratch_, data_);
    counts.conditions = conditions_ + pr.rule.length();
  } else {
    scratch_.clear();
    const auto& sel = a.positive_side ? selected_pos_ : selected_neg_;
    const auto& pool = side_pool(a.positive_side);
    for (std::uint32_t i : sel)
      if (i != a.pool_index) scratch_.or_with(pool[i].cover);
    counts = a.positive_side ? count_pair(scratch_, neg_cover_, data_)
                             : count_pair(pos_cover_, scratch_, data_);
    counts.conditions = conditions_ - pr.rule.length();
  }
  return objective_value(counts, data_.n, alpha1_, alpha2_);
}

void RuleSearch::rebuild_side_cover(bool positive) {
  BitVector& cover = positive ? pos_cover_ : neg_cover_;
  cover.clear();
  const auto& sel = positive ? selected_pos_ : selected_neg_;
  const auto& pool = side_pool(positive);
  for (std::uint32_t i : sel) cover.or_with(pool[i].cover);
}

void RuleSearch::apply_action(const Action& a, double new_objective) {
  auto& sel = a.positive_side ? selected_pos_ : selected_neg_;
  auto& flags = a.positive_side ? in_pos_ : in_neg_;
  const PooledRule& pr = side_pool(a.positive_side)[a.pool_index];
  if (a.add) {
    sel.insert(std::upper_bound(sel.begin(), sel.end(), a.pool_index),
               a.pool_index);
    flags[a.pool_index] = 1;
    (a.positive_side ? pos_cover_ : neg_cover_).or_with(pr.cover);
    conditions_ += pr.rule.length();
  } else {
    sel.erase(std::find(sel.begin(), sel.end(), a.pool_index));
    flags[a.pool_index] = 0;
    rebuild_side_cover(a.positive_side);
    conditions_ -= pr.rule.length();
  }
  lambda_current_ = new_objective;
  if (lambda_current_ < lambda_best_) {
    lambda_best_ = lambda_current_;
    best_pos_ = selected_pos_;
    best_neg_ = selected_neg_;
  }
}

RuleSetPair RuleSearch::propose() {
  std::optional<Action> a = propose_action();
  RuleSetPair pair = current_pair();
  if (!a) return pair;
  const PooledRule& pr = side_pool(a->positive_side)[a->pool_index];
  auto& side = a->positive_side ? pair.positive : pair.negative;
  if (a->add) {
    side.push_back(pr.rule);
  } else {
    side.erase(std::find(side.begin(), side.end(), pr.rule));
  }
  return pair;
}

void RuleSearch::step() {
  const double temp =
      std::pow(cfg_.base_temperature,
               1.0 - static_cast<double>(t_) /
                         static_cast<double>(cfg_.iterations));
  std::optional<Action> a = propose_action();
  if (a) {
    PairCounts counts;
    const double lnew = evaluate_action(*a, counts);
    bool accept = lnew <= lambda_current_;
    if (!accept) accept = rng_.uniform() < std::exp((lambda_current_ - lnew) / temp);
    if (accept) apply_action(*a, lnew);
  }
  ++t_;
  trace_.push_back(lambda_best_);
}

void RuleSearch::run() {
  while (t_ < cfg_.iterations) step();
}

namespace {

RuleSetPair materialize(const std::vector<std::uint32_t>& pos,
                        const std::vector<std::uint32_t>& neg,
                        const CandidatePool& pool) {
  RuleSetPair pair;
  pair.positive.reserve(pos.size());
  for (std::uint32_t i : pos) pair.positive.push_back(pool.positive[i].rule);
  pair.negative.reserve(neg.size());
  for (std::uint32_t i : neg) pair.negative.push_back(pool.negative[i].rule);
  return pair;
}

}  // namespace

RuleSetPair RuleSearch::current_pair() const {
  return materialize(selected_pos_, selected_neg_, pool_);
}

RuleSetPair RuleSearch::best_pair() const {
  return materialize(best_pos_, best_neg_, pool_);
}

void RuleSearch::set_current(const RuleSetPair& pair) {
  selected_pos_.clear();
  selected_neg_.clear();
  std::fill(in_pos_.begin(), in_pos_.end(), 0);
  std::fill(in_neg_.begin(), in_neg_.end(), 0);
  auto locate = [](const std::vector<PooledRule>& pool, const Rule& r) {
    for (std::uint32_t i = 0; i < pool.size(); ++i)
      if (pool[i].rule == r) return i;
    throw ValidationError("rule not present in the candidate pool");
  };
  for (const Rule& r : pair.positive) {
    std::uint32_t i = locate(pool_.positive, r);
    selected_pos_.push_back(i);
    in_pos_[i] = 1;
  }
  for (const Rule& r : pair.negative) {
    std::uint32_t i = locate(pool_.negative, r);
    selected_neg_.push_back(i);
    in_neg_[i] = 1;
  }
  std::sort(selected_pos_.begin(), selected_pos_.end());
  std::sort(selected_neg_.begin(), selected_neg_.end());
  rebuild_side_cover(true);
  rebuild_side_cover(false);
  conditions_ = complexity(pair);
  PairCounts c = count_pair(pos_cover_, neg_cover_, data_);
  c.conditions = conditions_;
  lambda_current_ = objective_value(c, data_.n, alpha1_, alpha2_);
  lambda_best_ = std::min(lambda_best_, lambda_current_);
}

HybridRuleSetModel train_ruleset(const BinaryDataset& d,
                                 const CandidatePool& pool, double alpha1,
                                 double alpha2, const RuleSearchConfig& cfg,
                                 std::uint64_t seed, SearchTrace* trace) {
  if (cfg.restarts < 1) throw ValidationError("restarts must be >= 1");
  double best_lambda = std::numeric_limits<double>::infinity();
  RuleSetPair best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RuleSearch search(d, pool, alpha1, alpha2, cfg, derive_seed(seed, r));
    search.run();
    if (trace) trace->lambda.push_back(search.lambda_trace());
    if (search.lambda_best() < best_lambda) {
      best_lambda = search.lambda_best();
      best = search.best_pair();
    }
  }
  HybridRuleSetModel model;
  model.condition_schema = d.conditions;
  model.pair = std::move(best);
  model.alpha1 = alpha1;
  model.alpha2 = alpha2;
  model.training_objective = best_lambda;
  return model;
}

}  // namespace hpm

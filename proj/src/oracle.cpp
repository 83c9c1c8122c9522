#include "hpm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hpm/errors.hpp"

namespace hpm {
namespace oracle {

namespace {

struct Subset {
  std::uint64_t mask = 0;
  BitVector cover;
  std::size_t conditions = 0;
};

double subset_count(std::size_t k, std::size_t cap) {
  double total = 0.0;
  double binom = 1.0;  // C(k, 0)
  for (std::size_t j = 0; j <= std::min(cap, k); ++j) {
    total += binom;
    binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
  }
  return total;
}

void collect_subsets(const std::vector<PooledRule>& rules, std::size_t max_rules,
                     std::size_t start, Subset& current,
                     std::vector<Subset>& out) {
  for (std::size_t i = start; i < rules.size(); ++i) {
    Subset next;
    next.mask = current.mask | (std::uint64_t{1} << i);
    next.cover = current.cover;
    next.cover.or_with(rules[i].cover);
    next.conditions = current.conditions + rules[i].rule.length();
    out.push_back(next);
    if (std::popcount(next.mask) < static_cast<int>(max_rules))
      collect_subsets(rules, max_rules, i + 1, next, out);
  }
}

std::vector<Subset> enumerate_subsets(const std::vector<PooledRule>& rules,
                                      std::size_t max_rules, std::size_t n) {
  if (rules.size() >= 63)
    throw ValidationError("rule pool too large for subset enumeration");
  std::vector<Subset> subsets;
  Subset empty{0, BitVector(n), 0};
  subsets.push_back(empty);
  collect_subsets(rules, max_rules, 0, empty, subsets);
  std::sort(subsets.begin(), subsets.end(),
            [](const Subset& a, const Subset& b) { return a.mask < b.mask; });
  return subsets;
}

RuleSetPair pair_from_masks(const CandidatePool& pool, std::uint64_t pos_mask,
                            std::uint64_t neg_mask) {
  RuleSetPair pair;
  for (std::size_t i = 0; i < pool.positive.size(); ++i)
    if ((pos_mask >> i) & 1u) pair.positive.push_back(pool.positive[i].rule);
  for (std::size_t i = 0; i < pool.negative.size(); ++i)
    if ((neg_mask >> i) & 1u) pair.negative.push_back(pool.negative[i].rule);
  return pair;
}

}  // namespace

BruteForceResult brute_force_ruleset(const CandidatePool& pool,
                                     const BinaryDataset& d, double alpha1,
                                     double alpha2,
                                     std::size_t max_rules_per_side) {
  const double pairs = subset_count(pool.positive.size(), max_rules_per_side) *
                       subset_count(pool.negative.size(), max_rules_per_side);
  if (pairs > 1e6)
    throw ValidationError("subset space too large: about " +
                          std::to_string(static_cast<std::uint64_t>(pairs)) +
                          " pairs");

  std::vector<Subset> pos =
      enumerate_subsets(pool.positive, max_rules_per_side, d.n);
  std::vector<Subset> neg =
      enumerate_subsets(pool.negative, max_rules_per_side, d.n);

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_pos = 0;
  std::uint64_t best_neg = 0;
  for (const Subset& ps : pos) {
    for (const Subset& ns : neg) {
      PairCounts c = count_pair(ps.cover, ns.cover, d);
      c.conditions = ps.conditions + ns.conditions;
      const double value = objective_value(c, d.n, alpha1, alpha2);
      if (value < best) {
        best = value;
        best_pos = ps.mask;
        best_neg = ns.mask;
      }
    }
  }
  return {pair_from_masks(pool, best_pos, best_neg), best};
}

SimulationResult simulate_process(const RuleSetPair& pair,
                                  const BinaryDataset& d) {
  std::size_t wrong = 0;
  std::size_t routed = 0;
  for (std::size_t row = 0; row < d.n; ++row) {
    int predicted;
    if (covers_set(pair.positive, d, row)) {
      predicted = 1;
      ++routed;
    } else if (covers_set(pair.negative, d, row)) {
      predicted = -1;
      ++routed;
    } else {
      predicted = d.blackbox_labels[row];
    }
    if (predicted != d.labels[row]) ++wrong;
  }
  return {static_cast<double>(wrong) / static_cast<double>(d.n),
          static_cast<double>(routed) / static_cast<double>(d.n)};
}

SimulationResult simulate_process(const HybridLinearModel& m,
                                  const Dataset& d) {
  LinearPredictor pred(m, d);
  std::size_t wrong = 0;
  std::size_t routed = 0;
  for (std::size_t row = 0; row < d.n; ++row) {
    auto [label, route] = pred.predict(row);
    if (route != Route::blackbox) ++routed;
    if (label != d.labels[row]) ++wrong;
  }
  return {static_cast<double>(wrong) / static_cast<double>(d.n),
          static_cast<double>(routed) / static_cast<double>(d.n)};
}

std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& fn,
    std::vector<double> point, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be > 0");
  std::vector<double> grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double up = fn(point);
    point[i] = saved - h;
    const double down = fn(point);
    point[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GridResult grid_minimize_linear(const Dataset& d, double alpha1, double alpha2,
                                const LossSpec& spec, std::size_t resolution,
                                const GridWindow& window) {
  DesignMatrix m = build_design(d);
  if (m.d > 2)
    throw ValidationError("grid oracle supports at most 2 features");
  if (resolution < 1) throw ValidationError("resolution must be >= 1");

  auto axis = [&](double lo, double hi, std::size_t i) {
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(resolution);
  };

  GridResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> w(m.d, 0.0);

  std::vector<std::size_t> idx(m.d, 0);
  while (true) {
    for (std::size_t c = 0; c < m.d; ++c)
      w[c] = axis(window.w_lo, window.w_hi, idx[c]);
    double w_l1 = 0.0;
    for (double v : w) w_l1 += std::abs(v);
    for (std::size_t ip = 0; ip <= resolution; ++ip) {
      const double thp = axis(window.theta_lo, window.theta_hi, ip);
      for (std::size_t im = 0; im <= ip; ++im) {
        const double thm = axis(window.theta_lo, window.theta_hi, im);
        const double f = smoothed_loss(w, thp, thm, m, spec) + alpha1 * w_l1 +
                         alpha2 * (thp - thm);
        if (f < best.objective) {
          best.objective = f;
          best.w = w;
          best.theta_plus = thp;
          best.theta_minus = thm;
        }
      }
    }
    std::size_t c = 0;
    for (; c < m.d; ++c) {
      if (++idx[c] <= resolution) break;
      idx[c] = 0;
    }
    if (c == m.d) break;
  }
  return best;
}

}  // namespace oracle
}  // namespace hpm

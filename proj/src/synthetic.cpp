#include "hpm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace hpm {
namespace synthetic {

BinaryDataset random_binary_dataset(Rng& rng, std::size_t n,
                                    std::size_t conditions, double flip_prob) {
  BinaryDataset d;
  d.n = n;
  d.labels.resize(n);
  d.blackbox_labels.resize(n);
  d.label_pos = BitVector(n);
  d.label_neg = BitVector(n);
  d.blackbox_pos = BitVector(n);
  const double pos_rate = 0.3 + 0.4 * rng.uniform();
  for (std::size_t r = 0; r < n; ++r) {
    d.labels[r] = rng.bernoulli(pos_rate) ? 1 : -1;
    d.blackbox_labels[r] =
        rng.bernoulli(flip_prob) ? -d.labels[r] : d.labels[r];
    if (d.labels[r] == 1) d.label_pos.set(r); else d.label_neg.set(r);
    if (d.blackbox_labels[r] == 1) d.blackbox_pos.set(r);
  }
  for (std::size_t c = 0; c < conditions; ++c) {
    Condition cond{"c" + std::to_string(c), ConditionOp::eq, 0.0, "1"};
    BitVector col(n);
    const double density = 0.2 + 0.6 * rng.uniform();
    for (std::size_t r = 0; r < n; ++r)
      if (rng.bernoulli(density)) col.set(r);
    d.conditions.push_back(std::move(cond));
    d.columns.push_back(std::move(col));
  }
  return d;
}

Rule random_rule(Rng& rng, std::size_t conditions, std::size_t max_len) {
  const std::size_t len =
      1 + rng.below(std::min(max_len, conditions));
  std::set<std::uint32_t> ids;
  while (ids.size() < len)
    ids.insert(static_cast<std::uint32_t>(rng.below(conditions)));
  Rule r;
  r.condition_ids.assign(ids.begin(), ids.end());
  return r;
}

RuleSetPair random_pair(Rng& rng, std::size_t conditions,
                        std::size_t max_rules_per_side, std::size_t max_len) {
  RuleSetPair pair;
  const std::size_t np = rng.below(max_rules_per_side + 1);
  const std::size_t nn = rng.below(max_rules_per_side + 1);
  std::set<Rule> seen;
  while (pair.positive.size() < np) {
    Rule r = random_rule(rng, conditions, max_len);
    if (seen.insert(r).second) pair.positive.push_back(std::move(r));
  }
  seen.clear();
  while (pair.negative.size() < nn) {
    Rule r = random_rule(rng, conditions, max_len);
    if (seen.insert(r).second) pair.negative.push_back(std::move(r));
  }
  return pair;
}

TinyInstance random_tiny_instance(Rng& rng) {
  TinyInstance t;
  const std::size_t n = 20 + rng.below(21);           // 20..40
  const std::size_t conditions = 4 + rng.below(3);    // 4..6
  t.max_len = 1 + rng.below(2);                       // 1..2
  t.alpha1 = 0.01 + 0.07 * rng.uniform();
  t.alpha2 = 0.05 + 0.45 * rng.uniform();
  t.data = random_binary_dataset(rng, n, conditions, 0.1 + 0.2 * rng.uniform());
  t.pool = mine_candidates(t.data, t.max_len, t.alpha1, t.alpha2, 6);
  return t;
}

Dataset random_numeric_dataset(Rng& rng, std::size_t n, std::size_t features) {
  Dataset d;
  d.n = n;
  for (std::size_t f = 0; f < features; ++f) {
    FeatureColumn col;
    col.name = "x" + std::to_string(f);
    col.kind = FeatureKind::numeric;
    col.numeric.resize(n);
    for (std::size_t r = 0; r < n; ++r)
      col.numeric[r] = -2.0 + 4.0 * rng.uniform();
    d.features.push_back(std::move(col));
  }
  d.labels.resize(n);
  d.blackbox_labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    d.labels[r] = rng.bernoulli(0.5) ? 1 : -1;
    d.blackbox_labels[r] = rng.bernoulli(0.5) ? 1 : -1;
  }
  return d;
}

Dataset two_blob_dataset(Rng& rng, std::size_t n, std::size_t features,
                         double flip_prob) {
  Dataset d;
  d.n = n;
  d.labels.resize(n);
  d.blackbox_labels.resize(n);
  std::vector<FeatureColumn> cols(features);
  for (std::size_t f = 0; f < features; ++f) {
    cols[f].name = "x" + std::to_string(f);
    cols[f].kind = FeatureKind::numeric;
    cols[f].numeric.resize(n);
  }
  for (std::size_t r = 0; r < n; ++r) {
    const int label = r % 2 == 0 ? 1 : -1;
    d.labels[r] = label;
    d.blackbox_labels[r] = rng.bernoulli(flip_prob) ? -label : label;
    for (std::size_t f = 0; f < features; ++f)
      cols[f].numeric[r] = 1.2 * label + (-0.9 + 1.8 * rng.uniform());
  }
  d.features = std::move(cols);
  return d;
}

Dataset region_dataset(Rng& rng, std::size_t n, double flip_prob) {
  Dataset d;
  d.n = n;
  FeatureColumn region;
  region.name = "region";
  region.kind = FeatureKind::categorical;
  region.categorical.resize(n);
  std::vector<FeatureColumn> noise(4);
  for (std::size_t f = 0; f < noise.size(); ++f) {
    noise[f].name = "g" + std::to_string(f);
    noise[f].kind = FeatureKind::categorical;
    noise[f].categorical.resize(n);
  }
  d.labels.resize(n);
  d.blackbox_labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const bool in_region = r % 5 != 4;  // exactly 80%
    region.categorical[r] = in_region ? "in" : "out";
    d.labels[r] = in_region ? 1 : (rng.bernoulli(0.5) ? 1 : -1);
    d.blackbox_labels[r] =
        rng.bernoulli(flip_prob) ? -d.labels[r] : d.labels[r];
    for (auto& col : noise)
      col.categorical[r] = rng.bernoulli(0.5) ? "1" : "0";
  }
  d.features.push_back(std::move(region));
  for (auto& col : noise) d.features.push_back(std::move(col));
  return d;
}

Dataset one_feature_fixture() {
  // symmetric values with unit population variance up to rounding
  const double a = 0.5477225575051661;   // sqrt(0.3)
  const double b = 1.3038404810405297;   // sqrt(1.7)
  Dataset d;
  d.n = 16;
  FeatureColumn col;
  col.name = "x0";
  col.kind = FeatureKind::numeric;
  col.numeric = {-b, -b, -b, -b, -a, -a, -a, -a, a, a, a, a, b, b, b, b};
  d.features.push_back(std::move(col));
  //                 -b  -b  -b  -b  -a  -a  -a  -a   a   a   a   a   b   b  b  b
  d.labels =        {-1, -1, -1,  1, -1, -1,  1,  1, -1,  1,  1,  1, -1,  1, 1, 1};
  d.blackbox_labels={-1, -1, -1, -1, -1,  1,  1, -1,  1,  1, -1,  1,  1,  1, 1, 1};
  return d;
}

}  // namespace synthetic
}  // namespace hpm

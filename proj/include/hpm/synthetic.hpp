#pragma once

#include <cstdint>

#include "hpm/dataset.hpp"
#include "hpm/rng.hpp"
#include "hpm/rules.hpp"
#include "hpm/ruleset_model.hpp"

namespace hpm {
namespace synthetic {

// Small random fixtures shared by the verification suite and the tests.

// Random condition bits (per-column density in [0.2,0.8]), random labels,
// black-box labels produced by flipping true labels with probability
// flip_prob.
BinaryDataset random_binary_dataset(Rng& rng, std::size_t n,
                                    std::size_t conditions,
                                    double flip_prob = 0.2);

Rule random_rule(Rng& rng, std::size_t conditions, std::size_t max_len);
RuleSetPair random_pair(Rng& rng, std::size_t conditions,
                        std::size_t max_rules_per_side, std::size_t max_len);

struct TinyInstance {
  BinaryDataset data;
  CandidatePool pool;  // at most 6 rules per side
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::size_t max_len = 2;
};

// Instance small enough for exhaustive subset enumeration.
TinyInstance random_tiny_instance(Rng& rng);

// Numeric feature table with uniform values in [-2,2] and random labels;
// for gradient checking.
Dataset random_numeric_dataset(Rng& rng, std::size_t n, std::size_t features);

// Two linearly separated point clouds in `features` dimensions; black-box is
// the true label flipped with probability flip_prob.
Dataset two_blob_dataset(Rng& rng, std::size_t n, std::size_t features,
                         double flip_prob);

// 80% of rows satisfy region=="in" and are all positive, so one rule covers
// them perfectly; the rest carry balanced random labels. Black-box labels
// flip truth with probability flip_prob.
Dataset region_dataset(Rng& rng, std::size_t n, double flip_prob = 0.05);

// Single numeric feature with near-zero mean and near-unit variance, so the
// trainer's standardization is essentially the identity.
Dataset one_feature_fixture();

}  // namespace synthetic
}  // namespace hpm

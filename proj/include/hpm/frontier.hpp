#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpm/dataset.hpp"
#include "hpm/model_io.hpp"

namespace hpm {

enum class ModelKind { rules, linear };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct FrontierPoint {
  double transparency = 0.0;
  double accuracy = 0.0;
  std::size_t complexity = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::string model_kind;
  std::string model_path;

  // diagnostics, reported alongside but not part of the CSV contract
  double interpretable_accuracy = -1.0;  // -1 when no row takes the route
  double blackbox_accuracy = -1.0;
  bool failed = false;
};

// Transparency, end-to-end accuracy and cognitive-unit complexity of a model
// on an evaluation split.
FrontierPoint evaluate(const Model& model, const Dataset& test);

struct SweepSettings {
  // rules trainer
  std::size_t max_rule_len = 4;
  std::size_t max_rules_per_side = 5000;
  std::vector<double> quantiles{0.25, 0.5, 0.75};
  RuleSearchConfig search;
  // linear trainer
  ApgConfig apg;
  LossSpec loss;
  // when non-empty, per-cell models are written here and referenced from the CSV
  std::string models_dir;
};

struct SweepGrid {
  std::vector<double> alpha1_values;
  std::vector<double> alpha2_values;
  SweepSettings settings;
};

// One trained and evaluated point per grid cell, ordered by (alpha2, alpha1),
// with the synthetic transparency-0 endpoint prepended. Failed cells yield a
// sentinel row (transparency and accuracy -1). Deterministic regardless of
// the worker count.
std::vector<FrontierPoint> sweep(const Dataset& train, const Dataset& test,
                                 const SweepGrid& grid, ModelKind kind,
                                 std::uint64_t seed, std::size_t jobs);

// Points not dominated in (transparency up, accuracy up); exact metric ties
// keep the lowest complexity. Sorted by transparency ascending.
std::vector<FrontierPoint> pareto(const std::vector<FrontierPoint>& points);

// CSV with the fixed header
// transparency,accuracy,complexity,alpha1,alpha2,kind,model_path
// and 6-decimal fixed formatting.
void export_frontier(const std::vector<FrontierPoint>& points,
                     const std::string& path);
std::string frontier_to_csv(const std::vector<FrontierPoint>& points);

}  // namespace hpm

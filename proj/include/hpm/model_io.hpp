#pragma once

#include <string>
#include <variant>

#include "hpm/linear_model.hpp"
#include "hpm/ruleset_model.hpp"

namespace hpm {

using Model = std::variant<HybridRuleSetModel, HybridLinearModel>;

inline std::string model_kind(const Model& m) {
  return std::holds_alternative<HybridRuleSetModel>(m) ? "rules" : "linear";
}

// Versioned JSON model files; loading a newer format version fails closed.
std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hpm

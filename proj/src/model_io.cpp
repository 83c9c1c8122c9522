#include "hpm/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hpm/errors.hpp"

namespace hpm {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json condition_to_json(const Condition& c) {
  json j;
  j["feature"] = c.feature;
  j["op"] = condition_op_name(c.op);
  if (c.op == ConditionOp::eq || c.op == ConditionOp::neq) {
    j["value"] = c.token;
  } else {
    j["value"] = c.threshold;
  }
  return j;
}

Condition condition_from_json(const json& j) {
  Condition c;
  c.feature = j.at("feature").get<std::string>();
  c.op = condition_op_from_name(j.at("op").get<std::string>());
  if (c.op == ConditionOp::eq || c.op == ConditionOp::neq) {
    c.token = j.at("value").get<std::string>();
  } else {
    c.threshold = j.at("value").get<double>();
  }
  return c;
}

json rules_to_json(const std::vector<Rule>& rules,
                   const std::vector<Condition>& schema) {
  json arr = json::array();
  for (const Rule& r : rules) {
    json conds = json::array();
    for (std::uint32_t id : r.condition_ids)
      conds.push_back(condition_to_json(schema[id]));
    arr.push_back(conds);
  }
  return arr;
}

std::vector<Rule> rules_from_json(const json& arr,
                                  const std::vector<Condition>& schema) {
  std::vector<Rule> rules;
  for (const json& conds : arr) {
    Rule r;
    for (const json& jc : conds) {
      const Condition c = condition_from_json(jc);
      bool found = false;
      for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i] == c) {
          r.condition_ids.push_back(static_cast<std::uint32_t>(i));
          found = true;
          break;
        }
      }
      if (!found)
        throw ValidationError("model file: rule condition '" + c.to_string() +
                              "' is missing from the binarization schema");
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

json ruleset_to_json(const HybridRuleSetModel& m) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "rules";
  j["alpha1"] = m.alpha1;
  j["alpha2"] = m.alpha2;
  j["training_objective"] = m.training_objective;
  json schema = json::array();
  for (const Condition& c : m.condition_schema)
    schema.push_back(condition_to_json(c));
  j["binarization"] = schema;
  j["positive_rules"] = rules_to_json(m.pair.positive, m.condition_schema);
  j["negative_rules"] = rules_to_json(m.pair.negative, m.condition_schema);
  return j;
}

HybridRuleSetModel ruleset_from_json(const json& j) {
  HybridRuleSetModel m;
  m.alpha1 = j.at("alpha1").get<double>();
  m.alpha2 = j.at("alpha2").get<double>();
  m.training_objective = j.at("training_objective").get<double>();
  for (const json& jc : j.at("binarization"))
    m.condition_schema.push_back(condition_from_json(jc));
  m.pair.positive = rules_from_json(j.at("positive_rules"), m.condition_schema);
  m.pair.negative = rules_from_json(j.at("negative_rules"), m.condition_schema);
  return m;
}

json linear_to_json(const HybridLinearModel& m) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "linear";
  json feats = json::array();
  for (const LinearFeature& f : m.features) {
    json jf;
    jf["feature"] = f.feature;
    jf["indicator"] = f.indicator;
    if (f.indicator) jf["token"] = f.token;
    feats.push_back(jf);
  }
  j["features"] = feats;
  j["weights"] = m.weights;
  j["theta_plus"] = m.theta_plus;
  j["theta_minus"] = m.theta_minus;
  j["standardization"] = {{"mean", m.standardization.mean},
                          {"scale", m.standardization.scale}};
  j["loss"] = loss_kind_name(m.loss.kind);
  j["mu"] = m.loss.mu;
  j["final_objective"] = m.final_objective;
  return j;
}

HybridLinearModel linear_from_json(const json& j) {
  HybridLinearModel m;
  for (const json& jf : j.at("features")) {
    LinearFeature f;
    f.feature = jf.at("feature").get<std::string>();
    f.indicator = jf.at("indicator").get<bool>();
    if (f.indicator) f.token = jf.at("token").get<std::string>();
    m.features.push_back(std::move(f));
  }
  m.weights = j.at("weights").get<std::vector<double>>();
  m.theta_plus = j.at("theta_plus").get<double>();
  m.theta_minus = j.at("theta_minus").get<double>();
  m.standardization.mean =
      j.at("standardization").at("mean").get<std::vector<double>>();
  m.standardization.scale =
      j.at("standardization").at("scale").get<std::vector<double>>();
  m.loss.kind = loss_kind_from_name(j.at("loss").get<std::string>());
  m.loss.mu = j.at("mu").get<double>();
  m.final_objective = j.at("final_objective").get<double>();
  if (m.weights.size() != m.features.size() ||
      m.standardization.mean.size() != m.features.size() ||
      m.standardization.scale.size() != m.features.size())
    throw ValidationError("model file: inconsistent vector lengths");
  if (m.theta_plus < m.theta_minus)
    throw ValidationError("model file: theta_plus < theta_minus");
  return m;
}

}  // namespace

std::string model_to_json(const Model& m) {
  json j = std::holds_alternative<HybridRuleSetModel>(m)
               ? ruleset_to_json(std::get<HybridRuleSetModel>(m))
               : linear_to_json(std::get<HybridLinearModel>(m));
  return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") +
                          e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version > kFormatVersion)
      throw ValidationError("model file format version " +
                            std::to_string(version) +
                            " is newer than supported version " +
                            std::to_string(kFormatVersion));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rules") return ruleset_from_json(j);
    if (kind == "linear") return linear_from_json(j);
    throw ValidationError("model file: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file '" + path + "'");
  out << model_to_json(m);
  if (!out) throw ValidationError("write failure on '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace hpm

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hpm/bitvector.hpp"

namespace hpm {

enum class FeatureKind { numeric, categorical };

// One raw data column. Exactly one of the value vectors is populated,
// matching `kind`.
struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<double> numeric;
  std::vector<std::string> categorical;

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

// Labeled feature table with the black-box predictions attached. This is the
// only channel through which the black-box exists; immutable after load.
struct Dataset {
  std::vector<FeatureColumn> features;
  std::vector<int> labels;           // entries in {-1,+1}
  std::vector<int> blackbox_labels;  // entries in {-1,+1}
  std::size_t n = 0;

  std::size_t feature_index(const std::string& name) const;  // throws ValidationError
  double blackbox_agreement() const;  // fraction of rows with yb == y

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class ConditionOp { eq, neq, le, gt };

// A single feature test; the unit both rules and binarized columns are made
// of. eq/neq carry a token, le/gt carry a threshold.
struct Condition {
  std::string feature;
  ConditionOp op = ConditionOp::eq;
  double threshold = 0.0;
  std::string token;

  bool evaluate(const Dataset& d, std::size_t feature_idx, std::size_t row) const;
  std::string to_string() const;

  friend bool operator==(const Condition&, const Condition&) = default;
};

std::string condition_op_name(ConditionOp op);
ConditionOp condition_op_from_name(const std::string& name);

// Condition-indicator view of a Dataset: one bit column per condition.
struct BinaryDataset {
  std::vector<Condition> conditions;
  std::vector<BitVector> columns;  // columns[j].test(i) == condition j holds on row i
  std::vector<int> labels;
  std::vector<int> blackbox_labels;
  std::size_t n = 0;
  BitVector label_pos;      // rows with y == +1
  BitVector label_neg;      // rows with y == -1
  BitVector blackbox_pos;   // rows with yb == +1

  bool bit(std::size_t row, std::size_t condition) const {
    return columns[condition].test(row);
  }
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

Dataset load_dataset(const std::string& path, const std::string& label_column,
                     const std::string& blackbox_column);
Dataset load_dataset(std::istream& in, const std::string& source_name,
                     const std::string& label_column,
                     const std::string& blackbox_column);

void save_dataset(const Dataset& d, const std::string& path,
                  const std::string& label_column = "label",
                  const std::string& blackbox_column = "blackbox");

BinaryDataset binarize(const Dataset& d,
                       const std::vector<double>& quantiles = {0.25, 0.5, 0.75});

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

// Row subset in the given (strictly increasing) order.
Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace hpm

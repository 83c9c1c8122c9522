#include "hpm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "hpm/errors.hpp"
#include "hpm/rng.hpp"

namespace hpm {

namespace {

std::optional<double> parse_double(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;  // from_chars rejects a leading '+'
  if (first == last) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(current);
  return cells;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line,
                          const std::string& column, const std::string& what) {
  std::ostringstream os;
  os << source << " line " << line;
  if (!column.empty()) os << ", column '" << column << "'";
  os << ": " << what;
  throw ValidationError(os.str());
}

int parse_label_cell(const std::string& source, std::size_t line,
                     const std::string& column, const std::string& token) {
  auto v = parse_double(token);
  if (!v) fail_at(source, line, column, "unparsable label cell '" + token + "'");
  if (*v == -1.0 || *v == 0.0) return -1;
  if (*v == 1.0) return 1;
  fail_at(source, line, column,
          "label cell '" + token + "' is not in {-1,+1} or {0,1}");
}

int parse_blackbox_cell(const std::string& source, std::size_t line,
                        const std::string& column, const std::string& token) {
  auto v = parse_double(token);
  if (!v)
    fail_at(source, line, column,
            "unparsable black-box cell '" + token + "'");
  if (*v == -1.0) return -1;
  if (*v >= 0.0 && *v <= 1.0) return *v >= 0.5 ? 1 : -1;
  fail_at(source, line, column,
          "black-box cell '" + token +
              "' is not in {-1,+1}, {0,1} or a probability in [0,1]");
}

// Nearest-rank empirical quantile of a sorted sample.
double quantile_of_sorted(const std::vector<double>& sorted, double q) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(q * n - 1e-9)) - 1;
  rank = std::clamp<long long>(rank, 0, static_cast<long long>(sorted.size()) - 1);
  return sorted[static_cast<std::size_t>(rank)];
}

}  // namespace

std::size_t Dataset::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  throw ValidationError("unknown feature '" + name + "'");
}

double Dataset::blackbox_agreement() const {
  if (n == 0) return 0.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == blackbox_labels[i]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

std::string condition_op_name(ConditionOp op) {
  switch (op) {
    case ConditionOp::eq: return "==";
    case ConditionOp::neq: return "!=";
    case ConditionOp::le: return "<=";
    case ConditionOp::gt: return ">";
  }
  return "?";
}

ConditionOp condition_op_from_name(const std::string& name) {
  if (name == "==") return ConditionOp::eq;
  if (name == "!=") return ConditionOp::neq;
  if (name == "<=") return ConditionOp::le;
  if (name == ">") return ConditionOp::gt;
  throw ValidationError("unknown condition operator '" + name + "'");
}

bool Condition::evaluate(const Dataset& d, std::size_t feature_idx,
                         std::size_t row) const {
  const FeatureColumn& col = d.features[feature_idx];
  switch (op) {
    case ConditionOp::eq:
    case ConditionOp::neq: {
      if (col.kind != FeatureKind::categorical) {
        throw ValidationError("condition '" + to_string() +
                              "' expects a categorical feature");
      }
      bool eq = col.categorical[row] == token;
      return op == ConditionOp::eq ? eq : !eq;
    }
    case ConditionOp::le:
    case ConditionOp::gt: {
      if (col.kind != FeatureKind::numeric) {
        throw ValidationError("condition '" + to_string() +
                              "' expects a numeric feature");
      }
      double v = col.numeric[row];
      return op == ConditionOp::le ? v <= threshold : v > threshold;
    }
  }
  return false;
}

std::string Condition::to_string() const {
  std::string rhs = (op == ConditionOp::eq || op == ConditionOp::neq)
                        ? token
                        : format_double(threshold);
  return feature + " " + condition_op_name(op) + " " + rhs;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Dataset load_dataset(const std::string& path, const std::string& label_column,
                     const std::string& blackbox_column) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return load_dataset(in, path, label_column, blackbox_column);
}

Dataset load_dataset(std::istream& in, const std::string& source_name,
                     const std::string& label_column,
                     const std::string& blackbox_column) {
  std::vector<std::vector<std::string>> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    table.push_back(split_csv_line(line));
  }
  if (table.empty()) throw ValidationError(source_name + ": empty file");

  const std::vector<std::string>& header = table.front();
  std::set<std::string> seen;
  for (const std::string& name : header) {
    if (name.empty()) fail_at(source_name, 1, "", "empty column name in header");
    if (!seen.insert(name).second)
      fail_at(source_name, 1, name, "duplicate column name");
  }

  auto find_column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError(source_name + ": column '" + name +
                            "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_idx = find_column(label_column);
  const std::size_t bb_idx = find_column(blackbox_column);
  if (label_idx == bb_idx)
    throw ValidationError(source_name +
                          ": label and black-box columns must differ");

  if (table.size() < 2) throw ValidationError(source_name + ": no data rows");
  const std::size_t n = table.size() - 1;

  for (std::size_t r = 0; r < n; ++r) {
    if (table[r + 1].size() != header.size()) {
      fail_at(source_name, r + 2, "",
              "expected " + std::to_string(header.size()) + " cells, got " +
                  std::to_string(table[r + 1].size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (table[r + 1][c].empty())
        fail_at(source_name, r + 2, header[c], "missing value");
    }
  }

  Dataset d;
  d.n = n;
  d.labels.resize(n);
  d.blackbox_labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    d.labels[r] =
        parse_label_cell(source_name, r + 2, label_column, table[r + 1][label_idx]);
    d.blackbox_labels[r] =
        parse_blackbox_cell(source_name, r + 2, blackbox_column, table[r + 1][bb_idx]);
  }

  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_idx || c == bb_idx) continue;
    FeatureColumn col;
    col.name = header[c];
    bool all_numeric = true;
    std::vector<double> numeric(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto v = parse_double(table[r + 1][c]);
      if (!v || !std::isfinite(*v)) {  // "nan"/"inf" cells stay categorical
        all_numeric = false;
        break;
      }
      numeric[r] = *v;
    }
    if (all_numeric) {
      col.kind = FeatureKind::numeric;
      col.numeric = std::move(numeric);
    } else {
      col.kind = FeatureKind::categorical;
      col.categorical.resize(n);
      for (std::size_t r = 0; r < n; ++r) col.categorical[r] = table[r + 1][c];
    }
    d.features.push_back(std::move(col));
  }
  return d;
}

void save_dataset(const Dataset& d, const std::string& path,
                  const std::string& label_column,
                  const std::string& blackbox_column) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write data file '" + path + "'");
  for (const FeatureColumn& col : d.features) out << col.name << ",";
  out << label_column << "," << blackbox_column << "\n";
  for (std::size_t r = 0; r < d.n; ++r) {
    for (const FeatureColumn& col : d.features) {
      if (col.kind == FeatureKind::numeric) {
        out << format_double(col.numeric[r]);
      } else {
        out << col.categorical[r];
      }
      out << ",";
    }
    out << d.labels[r] << "," << d.blackbox_labels[r] << "\n";
  }
  if (!out) throw ValidationError("write failure on '" + path + "'");
}

BinaryDataset binarize(const Dataset& d, const std::vector<double>& quantiles) {
  for (std::size_t i = 1; i < quantiles.size(); ++i) {
    if (!(quantiles[i - 1] < quantiles[i]))
      throw ValidationError("quantiles must be sorted and distinct");
  }
  for (double q : quantiles) {
    if (!(q > 0.0 && q < 1.0))
      throw ValidationError("quantiles must lie in (0,1)");
  }

  BinaryDataset b;
  b.n = d.n;
  b.labels = d.labels;
  b.blackbox_labels = d.blackbox_labels;

  auto add_column = [&](Condition cond, const FeatureColumn& col,
                        std::size_t feature_idx) {
    BitVector bits(d.n);
    for (std::size_t r = 0; r < d.n; ++r) {
      bool on;
      if (cond.op == ConditionOp::eq) {
        on = col.categorical[r] == cond.token;
      } else if (cond.op == ConditionOp::neq) {
        on = col.categorical[r] != cond.token;
      } else if (cond.op == ConditionOp::le) {
        on = col.numeric[r] <= cond.threshold;
      } else {
        on = col.numeric[r] > cond.threshold;
      }
      if (on) bits.set(r);
    }
    (void)feature_idx;
    b.conditions.push_back(std::move(cond));
    b.columns.push_back(std::move(bits));
  };

  for (std::size_t f = 0; f < d.features.size(); ++f) {
    const FeatureColumn& col = d.features[f];
    if (col.kind == FeatureKind::categorical) {
      std::set<std::string> distinct(col.categorical.begin(),
                                     col.categorical.end());
      if (distinct.size() <= 1) continue;  // constant feature: no conditions
      for (const std::string& v : distinct)
        add_column({col.name, ConditionOp::eq, 0.0, v}, col, f);
      for (const std::string& v : distinct)
        add_column({col.name, ConditionOp::neq, 0.0, v}, col, f);
    } else {
      auto [mn, mx] = std::minmax_element(col.numeric.begin(), col.numeric.end());
      if (*mn == *mx) continue;  // constant feature
      std::vector<double> sorted = col.numeric;
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> thresholds;
      for (double q : quantiles) thresholds.push_back(quantile_of_sorted(sorted, q));
      std::sort(thresholds.begin(), thresholds.end());
      thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                       thresholds.end());
      for (double t : thresholds) {
        add_column({col.name, ConditionOp::le, t, ""}, col, f);
        add_column({col.name, ConditionOp::gt, t, ""}, col, f);
      }
    }
  }
  if (b.conditions.empty())
    throw ValidationError("binarization produced no conditions");

  b.label_pos = BitVector(d.n);
  b.label_neg = BitVector(d.n);
  b.blackbox_pos = BitVector(d.n);
  for (std::size_t r = 0; r < d.n; ++r) {
    if (d.labels[r] == 1) b.label_pos.set(r); else b.label_neg.set(r);
    if (d.blackbox_labels[r] == 1) b.blackbox_pos.set(r);
  }
  return b;
}

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.n = rows.size();
  out.features.reserve(d.features.size());
  for (const FeatureColumn& col : d.features) {
    FeatureColumn c;
    c.name = col.name;
    c.kind = col.kind;
    if (col.kind == FeatureKind::numeric) {
      c.numeric.reserve(rows.size());
      for (std::size_t r : rows) c.numeric.push_back(col.numeric[r]);
    } else {
      c.categorical.reserve(rows.size());
      for (std::size_t r : rows) c.categorical.push_back(col.categorical[r]);
    }
    out.features.push_back(std::move(c));
  }
  out.labels.reserve(rows.size());
  out.blackbox_labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(d.labels[r]);
    out.blackbox_labels.push_back(d.blackbox_labels[r]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ValidationError("train fraction must lie in (0,1)");
  const auto k = static_cast<std::size_t>(
      std::floor(static_cast<double>(d.n) * spec.train_fraction + 1e-9));
  if (k < 1 || k >= d.n)
    throw ValidationError("split would leave an empty side (n=" +
                          std::to_string(d.n) + ", fraction " +
                          format_double(spec.train_fraction) + ")");
  std::vector<std::size_t> order(d.n);
  for (std::size_t i = 0; i < d.n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + k);
  std::vector<std::size_t> test(order.begin() + k, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {take_rows(d, train), take_rows(d, test)};
}

}  // namespace hpm

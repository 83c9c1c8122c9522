#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hpm/dataset.hpp"

namespace test_support {

// BinaryDataset from literal bit rows: rows[r][c] == '1' sets condition c on
// row r.
inline hpm::BinaryDataset make_binary(const std::vector<std::string>& rows,
                                      const std::vector<int>& labels,
                                      const std::vector<int>& blackbox) {
  hpm::BinaryDataset d;
  d.n = rows.size();
  const std::size_t m = rows.empty() ? 0 : rows[0].size();
  d.labels = labels;
  d.blackbox_labels = blackbox;
  d.label_pos = hpm::BitVector(d.n);
  d.label_neg = hpm::BitVector(d.n);
  d.blackbox_pos = hpm::BitVector(d.n);
  for (std::size_t c = 0; c < m; ++c) {
    hpm::Condition cond{"c" + std::to_string(c), hpm::ConditionOp::eq, 0.0,
                        "1"};
    hpm::BitVector col(d.n);
    for (std::size_t r = 0; r < d.n; ++r)
      if (rows[r][c] == '1') col.set(r);
    d.conditions.push_back(cond);
    d.columns.push_back(col);
  }
  for (std::size_t r = 0; r < d.n; ++r) {
    if (labels[r] == 1) d.label_pos.set(r); else d.label_neg.set(r);
    if (blackbox[r] == 1) d.blackbox_pos.set(r);
  }
  return d;
}

inline hpm::Dataset load_csv(const std::string& text,
                             const std::string& label = "label",
                             const std::string& blackbox = "blackbox") {
  std::istringstream in(text);
  return hpm::load_dataset(in, "inline.csv", label, blackbox);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("hpm_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

 private:
  std::filesystem::path dir_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace test_support

#include "hpm/frontier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "hpm/errors.hpp"
#include "hpm/rng.hpp"

namespace hpm {

std::string model_kind_name(ModelKind k) {
  return k == ModelKind::rules ? "rules" : "linear";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "rules") return ModelKind::rules;
  if (name == "linear") return ModelKind::linear;
  throw ValidationError("unknown model kind '" + name + "'");
}

FrontierPoint evaluate(const Model& model, const Dataset& test) {
  FrontierPoint p;
  p.model_kind = model_kind(model);
  std::size_t correct = 0;
  std::size_t routed = 0;
  std::size_t routed_correct = 0;
  std::size_t bb_correct = 0;

  auto tally = [&](std::size_t row, int label, Route route) {
    const bool ok = label == test.labels[row];
    if (ok) ++correct;
    if (route == Route::blackbox) {
      if (ok) ++bb_correct;
    } else {
      ++routed;
      if (ok) ++routed_correct;
    }
  };

  if (const auto* rules = std::get_if<HybridRuleSetModel>(&model)) {
    RulePredictor pred(*rules, test);
    for (std::size_t row = 0; row < test.n; ++row) {
      auto [label, route] = pred.predict(row);
      tally(row, label, route);
    }
    p.complexity = complexity(rules->pair);
    p.alpha1 = rules->alpha1;
    p.alpha2 = rules->alpha2;
  } else {
    const auto& linear = std::get<HybridLinearModel>(model);
    LinearPredictor pred(linear, test);
    for (std::size_t row = 0; row < test.n; ++row) {
      auto [label, route] = pred.predict(row);
      tally(row, label, route);
    }
    p.complexity = linear.nonzero_count();
  }

  const auto n = static_cast<double>(test.n);
  p.transparency = static_cast<double>(routed) / n;
  p.accuracy = static_cast<double>(correct) / n;
  if (routed > 0)
    p.interpretable_accuracy =
        static_cast<double>(routed_correct) / static_cast<double>(routed);
  if (routed < test.n)
    p.blackbox_accuracy = static_cast<double>(bb_correct) /
                          static_cast<double>(test.n - routed);
  return p;
}

namespace {

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string cell_model_path(const SweepSettings& settings, ModelKind kind,
                            double a1, double a2) {
  if (settings.models_dir.empty()) return "";
  return settings.models_dir + "/" + model_kind_name(kind) + "_a1_" +
         format_fixed6(a1) + "_a2_" + format_fixed6(a2) + ".json";
}

// duplicate grid values map to the same model path; writes must not overlap
std::mutex save_mutex;

FrontierPoint run_cell(const Dataset& train, const Dataset& test,
                       const BinaryDataset& train_bits, const SweepGrid& grid,
                       ModelKind kind, std::uint64_t seed, double a1,
                       double a2) {
  Model model;
  if (kind == ModelKind::rules) {
    CandidatePool pool =
        mine_candidates(train_bits, grid.settings.max_rule_len, a1, a2,
                        grid.settings.max_rules_per_side);
    model = train_ruleset(train_bits, pool, a1, a2, grid.settings.search, seed);
  } else {
    model = apg_train(train, a1, a2, grid.settings.loss, grid.settings.apg, seed);
  }
  FrontierPoint p = evaluate(model, test);
  p.alpha1 = a1;
  p.alpha2 = a2;
  const std::string path = cell_model_path(grid.settings, kind, a1, a2);
  if (!path.empty()) {
    std::lock_guard<std::mutex> lock(save_mutex);
    save_model(model, path);
    p.model_path = path;
  }
  return p;
}

}  // namespace

std::vector<FrontierPoint> sweep(const Dataset& train, const Dataset& test,
                                 const SweepGrid& grid, ModelKind kind,
                                 std::uint64_t seed, std::size_t jobs) {
  if (grid.alpha1_values.empty() || grid.alpha2_values.empty())
    throw ValidationError("sweep grids must be non-empty");
  for (double a : grid.alpha1_values)
    if (a < 0.0) throw ValidationError("alpha1 grid values must be >= 0");
  for (double a : grid.alpha2_values)
    if (a < 0.0) throw ValidationError("alpha2 grid values must be >= 0");

  std::vector<double> a1s = grid.alpha1_values;
  std::vector<double> a2s = grid.alpha2_values;
  std::sort(a1s.begin(), a1s.end());
  std::sort(a2s.begin(), a2s.end());

  struct Cell {
    double a1, a2;
  };
  std::vector<Cell> cells;
  for (double a2 : a2s)
    for (double a1 : a1s) cells.push_back({a1, a2});

  BinaryDataset train_bits;
  if (kind == ModelKind::rules)
    train_bits = binarize(train, grid.settings.quantiles);

  std::vector<FrontierPoint> results(cells.size());
  auto work = [&](std::size_t i) {
    const Cell& c = cells[i];
    try {
      results[i] =
          run_cell(train, test, train_bits, grid, kind, seed, c.a1, c.a2);
    } catch (const std::exception&) {
      FrontierPoint p;
      p.transparency = -1.0;
      p.accuracy = -1.0;
      p.alpha1 = c.a1;
      p.alpha2 = c.a2;
      p.model_kind = model_kind_name(kind);
      p.failed = true;
      results[i] = p;
    }
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t count = std::min(jobs, cells.size());
    workers.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          work(i);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  std::vector<FrontierPoint> out;
  out.reserve(results.size() + 1);
  FrontierPoint endpoint;  // the pure black-box anchor
  endpoint.transparency = 0.0;
  endpoint.accuracy = test.blackbox_agreement();
  endpoint.complexity = 0;
  endpoint.model_kind = model_kind_name(kind);
  endpoint.blackbox_accuracy = endpoint.accuracy;
  out.push_back(endpoint);
  for (FrontierPoint& p : results) out.push_back(std::move(p));
  return out;
}

std::vector<FrontierPoint> pareto(const std::vector<FrontierPoint>& points) {
  const std::size_t n = points.size();
  std::vector<char> keep(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && keep[i]; ++j) {
      if (j == i) continue;
      const FrontierPoint& p = points[i];
      const FrontierPoint& q = points[j];
      const bool geq = q.transparency >= p.transparency && q.accuracy >= p.accuracy;
      const bool strict = q.transparency > p.transparency || q.accuracy > p.accuracy;
      if (geq && strict) keep[i] = 0;
    }
  }
  // exact metric ties: lowest complexity survives, first occurrence on a draw
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !keep[j]) continue;
      const FrontierPoint& p = points[i];
      const FrontierPoint& q = points[j];
      if (q.transparency == p.transparency && q.accuracy == p.accuracy) {
        if (q.complexity < p.complexity ||
            (q.complexity == p.complexity && j < i)) {
          keep[i] = 0;
          break;
        }
      }
    }
  }
  std::vector<FrontierPoint> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(points[i]);
  std::stable_sort(out.begin(), out.end(),
                   [](const FrontierPoint& a, const FrontierPoint& b) {
                     return a.transparency < b.transparency;
                   });
  return out;
}

std::string frontier_to_csv(const std::vector<FrontierPoint>& points) {
  std::string csv =
      "transparency,accuracy,complexity,alpha1,alpha2,kind,model_path\n";
  for (const FrontierPoint& p : points) {
    csv += format_fixed6(p.transparency) + "," + format_fixed6(p.accuracy) +
           "," + std::to_string(p.complexity) + "," + format_fixed6(p.alpha1) +
           "," + format_fixed6(p.alpha2) + "," + p.model_kind + "," +
           p.model_path + "\n";
  }
  return csv;
}

void export_frontier(const std::vector<FrontierPoint>& points,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write frontier file '" + path + "'");
  out << frontier_to_csv(points);
  if (!out) throw ValidationError("write failure on '" + path + "'");
}

}  // namespace hpm

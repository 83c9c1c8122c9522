#include "hpm/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "hpm/cli.hpp"
#include "hpm/dataset.hpp"
#include "hpm/frontier.hpp"
#include "hpm/linear_model.hpp"
#include "hpm/model_io.hpp"
#include "hpm/oracle.hpp"
#include "hpm/rng.hpp"
#include "hpm/synthetic.hpp"

namespace hpm {
namespace acceptance {

namespace {

namespace fs = std::filesystem;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& message) {
    if (!condition) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << message;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// ---- shared state between criteria 2, 3 and 4 --------------------------

struct TinyRun {
  synthetic::TinyInstance instance;
  oracle::BruteForceResult oracle_best;  // over the mined pool
  double search_lambda = 0.0;
  SearchTrace trace;
};

std::vector<TinyRun> run_tiny_instances() {
  std::vector<TinyRun> runs;
  Rng rng(20240615);
  RuleSearchConfig cfg;
  cfg.iterations = 20000;
  cfg.restarts = 3;
  for (int i = 0; i < 20; ++i) {
    TinyRun run;
    run.instance = synthetic::random_tiny_instance(rng);
    const auto& t = run.instance;
    const std::size_t cap =
        std::max(t.pool.positive.size(), t.pool.negative.size());
    run.oracle_best = oracle::brute_force_ruleset(
        t.pool, t.data, t.alpha1, t.alpha2, std::max<std::size_t>(cap, 1));
    HybridRuleSetModel model =
        train_ruleset(t.data, t.pool, t.alpha1, t.alpha2, cfg,
                      derive_seed(977, static_cast<std::uint64_t>(i)),
                      &run.trace);
    run.search_lambda = model.training_objective;
    runs.push_back(std::move(run));
  }
  return runs;
}

// ---- criteria -----------------------------------------------------------

Check criterion_error_formula() {
  Check c;
  Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 5 + rng.below(36);  // 5..40
    const std::size_t m = 3 + rng.below(4);   // 3..6
    BinaryDataset d = synthetic::random_binary_dataset(rng, n, m, 0.25);
    RuleSetPair pair = synthetic::random_pair(rng, m, 3, 3);
    const oracle::SimulationResult sim = oracle::simulate_process(pair, d);
    const double closed_error = misclassification_error(pair, d);
    const double closed_transparency = transparency(pair, d);
    c.require(closed_error == sim.error,
              "error mismatch on fixture " + std::to_string(i) + ": " +
                  fmt(closed_error) + " vs " + fmt(sim.error));
    c.require(closed_transparency == sim.transparency,
              "transparency mismatch on fixture " + std::to_string(i));
    if (!c.ok) break;
  }
  return c;
}

Check criterion_brute_force(const std::vector<TinyRun>& runs) {
  Check c;
  int hits = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TinyRun& run = runs[i];
    const double gap = run.search_lambda - run.oracle_best.objective;
    c.require(gap >= -1e-12, "search beat the exhaustive optimum on instance " +
                                 std::to_string(i) + " by " + fmt(-gap));
    if (std::abs(gap) <= 1e-9) ++hits;
  }
  c.detail << "optimum attained on " << hits << "/20 instances";
  c.require(hits >= 18, "needed at least 18/20");
  return c;
}

Check criterion_support_bound(const std::vector<TinyRun>& runs) {
  Check c;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& t = runs[i].instance;
    CandidatePool universe = enumerate_rule_universe(t.data, t.max_len);
    oracle::BruteForceResult best =
        oracle::brute_force_ruleset(universe, t.data, t.alpha1, t.alpha2, 2);
    const double n = static_cast<double>(t.data.n);
    for (const Rule& r : best.pair.positive) {
      const double sup = static_cast<double>(rule_cover(r, t.data).count());
      c.require(sup + 1e-9 >= n * t.alpha1,
                "instance " + std::to_string(i) +
                    ": optimal positive rule with support " + fmt(sup) +
                    " < " + fmt(n * t.alpha1));
    }
    for (const Rule& r : best.pair.negative) {
      const double sup = static_cast<double>(rule_cover(r, t.data).count());
      const double bound = n * t.alpha1 / (1.0 - t.alpha2);
      c.require(sup + 1e-9 >= bound,
                "instance " + std::to_string(i) +
                    ": optimal negative rule with support " + fmt(sup) +
                    " < " + fmt(bound));
    }
  }
  if (c.ok) c.detail << "no optimal rule below the support bounds";
  return c;
}

Check criterion_chain_bounds(const std::vector<TinyRun>& runs) {
  Check c;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TinyRun& run = runs[i];
    const auto& t = run.instance;
    const RuleSetPair& best = run.oracle_best.pair;
    const double omega = static_cast<double>(complexity(best));
    std::vector<Rule> all = best.positive;
    all.insert(all.end(), best.negative.begin(), best.negative.end());
    const double sup = static_cast<double>(support(all, t.data));
    const double n = static_cast<double>(t.data.n);
    for (const auto& chain : run.trace.lambda) {
      for (double lambda : chain) {
        ++checked;
        c.require(omega <= (lambda + t.alpha2) / t.alpha1 + 1e-9,
                  "size bound violated on instance " + std::to_string(i));
        if (!best.positive.empty() || !best.negative.empty()) {
          const double bound = n * (t.alpha1 - lambda) / t.alpha2;
          c.require(sup + 1e-9 >= bound,
                    "transparency bound violated on instance " +
                        std::to_string(i));
        }
        if (!c.ok) return c;
      }
    }
  }
  c.detail << checked << " logged objectives checked";
  return c;
}

Check criterion_gradient() {
  Check c;
  Rng rng(424242);
  const LossKind kinds[] = {LossKind::hinge, LossKind::smoothed_hinge,
                            LossKind::logistic};
  const double mus[] = {1e-4, 0.2};
  const double step = 1e-6;
  for (LossKind kind : kinds) {
    for (double mu : mus) {
      const LossSpec spec{kind, mu};
      for (int trial = 0; trial < 100; ++trial) {
        Dataset data = synthetic::random_numeric_dataset(rng, 6, 3);
        DesignMatrix m = build_design(data);
        std::vector<double> point(m.d + 2);
        // resample until every margin is clear of the kink locations
        for (int attempt = 0;; ++attempt) {
          for (std::size_t j = 0; j < m.d; ++j)
            point[j] = -1.5 + 3.0 * rng.uniform();
          point[m.d] = 1.5 * rng.uniform();        // theta_plus
          point[m.d + 1] = -1.5 * rng.uniform();   // theta_minus
          bool clear = true;
          for (std::size_t r = 0; r < m.n && clear; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < m.d; ++j) s += point[j] * m.at(r, j);
            const double theta =
                m.blackbox_labels[r] == 1 ? point[m.d + 1] : point[m.d];
            const double z = m.labels[r] * (s - theta);
            if (kind == LossKind::hinge &&
                (std::abs(z - 1.0) < 10 * step * 2 ||
                 std::abs(z - (1.0 - mu)) < 10 * step * 2))
              clear = false;
            if (kind == LossKind::smoothed_hinge &&
                std::abs(z - 1.0) < 10 * step * 2)
              clear = false;
          }
          if (clear) break;
          if (attempt > 200) break;
        }
        std::vector<double> w(point.begin(), point.begin() + m.d);
        std::vector<double> grad_w;
        double g_thp = 0.0;
        double g_thm = 0.0;
        loss_gradient(w, point[m.d], point[m.d + 1], m, spec, grad_w, g_thp,
                      g_thm);
        std::vector<double> analytic = grad_w;
        analytic.push_back(g_thp);
        analytic.push_back(g_thm);

        auto fn = [&](const std::vector<double>& p) {
          std::vector<double> pw(p.begin(), p.begin() + m.d);
          return smoothed_loss(pw, p[m.d], p[m.d + 1], m, spec);
        };
        std::vector<double> fd = oracle::finite_diff(fn, point, step);
        double diff2 = 0.0;
        double norm2 = 0.0;
        for (std::size_t j = 0; j < fd.size(); ++j) {
          diff2 += (fd[j] - analytic[j]) * (fd[j] - analytic[j]);
          norm2 += analytic[j] * analytic[j];
        }
        const double rel =
            std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-4);
        c.require(rel <= 1e-4, loss_kind_name(kind) + " mu=" + fmt(mu) +
                                   " trial " + std::to_string(trial) +
                                   ": relative error " + fmt(rel));
        if (!c.ok) return c;
      }
    }
  }
  c.detail << "600 gradient comparisons within 1e-4";
  return c;
}

Check criterion_sandwich() {
  Check c;
  Rng rng(7);
  for (double mu : {1e-4, 1e-2, 0.2}) {
    for (int i = 0; i < 1000; ++i) {
      const double z = -3.0 + 6.0 * rng.uniform();
      const double smoothed = smoothed_phi(LossKind::hinge, z, mu);
      const double exact = loss_phi(LossKind::hinge, z);
      c.require(smoothed <= exact + 1e-12,
                "phi_mu > phi at z=" + fmt(z) + ", mu=" + fmt(mu));
      c.require(exact <= smoothed + mu / 2.0 + 1e-12,
                "phi > phi_mu + mu/2 at z=" + fmt(z) + ", mu=" + fmt(mu));
      if (!c.ok) return c;
    }
  }
  c.detail << "3000 sandwich inequalities hold";
  return c;
}

Check criterion_apg() {
  Check c;
  // dense-grid reference on a single feature
  Dataset fixture = synthetic::one_feature_fixture();
  const double a1 = 0.05;
  const double a2 = 0.1;
  const LossSpec spec{LossKind::hinge, 1e-4};
  ApgConfig cfg;
  cfg.tolerance = 1e-9;
  HybridLinearModel model = apg_train(fixture, a1, a2, spec, cfg, 42);

  oracle::GridWindow window{-2.0, 2.0, -2.0, 2.0};
  oracle::GridResult grid;
  const std::size_t res = 80;
  for (int stage = 0; stage < 4; ++stage) {
    grid = oracle::grid_minimize_linear(fixture, a1, a2, spec, res, window);
    const double w_spacing = (window.w_hi - window.w_lo) / res;
    const double t_spacing = (window.theta_hi - window.theta_lo) / res;
    window.w_lo = grid.w[0] - 3 * w_spacing;
    window.w_hi = grid.w[0] + 3 * w_spacing;
    window.theta_lo = std::min(grid.theta_minus, grid.theta_plus) - 3 * t_spacing;
    window.theta_hi = std::max(grid.theta_minus, grid.theta_plus) + 3 * t_spacing;
  }
  const double gap = std::abs(model.final_objective - grid.objective);
  c.detail << "grid F=" << fmt(grid.objective)
           << " apg F=" << fmt(model.final_objective);
  c.require(gap <= 1e-3, "1-feature APG is " + fmt(gap) + " from the grid optimum");

  // large transparency reward on separable blobs
  Rng rng(99);
  Dataset blobs = synthetic::two_blob_dataset(rng, 200, 5, 0.05);
  HybridLinearModel blob_model = apg_train(blobs, 0.001, 1.0, spec, cfg, 42);
  FrontierPoint p = evaluate(Model{blob_model}, blobs);
  c.require(p.transparency == 1.0,
            "expected transparency 1, got " + fmt(p.transparency));
  c.require(p.accuracy >= 0.95,
            "expected training accuracy >= 0.95, got " + fmt(p.accuracy));
  return c;
}

Check criterion_frontier_anchors() {
  Check c;
  Rng rng(2718);
  Dataset data = synthetic::region_dataset(rng, 300, 0.1);
  auto [train, test] = split(data, {0.8, 11});

  SweepGrid grid;
  grid.alpha1_values = {0.01, 0.05};
  grid.alpha2_values = {0.05, 0.3};
  grid.settings.search.iterations = 300;
  grid.settings.search.restarts = 1;
  grid.settings.max_rules_per_side = 50;
  std::vector<FrontierPoint> points =
      sweep(train, test, grid, ModelKind::rules, 42, 1);
  c.require(points.size() == 5, "expected 4 cells + endpoint");
  c.require(points[0].transparency == 0.0, "endpoint transparency is not 0");
  c.require(points[0].accuracy == test.blackbox_agreement(),
            "endpoint accuracy " + fmt(points[0].accuracy) +
                " != black-box agreement " + fmt(test.blackbox_agreement()));
  c.require(points[0].complexity == 0, "endpoint complexity is not 0");

  // a closed band routes everything to the linear side
  HybridLinearModel closed;
  closed.features = {{"x0", false, ""}};
  closed.weights = {0.7};
  closed.theta_plus = 0.3;
  closed.theta_minus = 0.3;
  closed.standardization = {{0.0}, {1.0}};
  Rng rng2(5);
  Dataset numeric = synthetic::random_numeric_dataset(rng2, 64, 1);
  FrontierPoint lp = evaluate(Model{closed}, numeric);
  c.require(lp.transparency == 1.0, "closed band transparency is not 1");

  // dominance-free pareto output on random point sets
  Rng rng3(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<FrontierPoint> pts(rng3.below(41));
    for (FrontierPoint& p : pts) {
      const bool quantized = rng3.bernoulli(0.5);
      p.transparency = quantized
                           ? 0.1 * static_cast<double>(rng3.below(11))
                           : rng3.uniform();
      p.accuracy = quantized ? 0.1 * static_cast<double>(rng3.below(11))
                             : rng3.uniform();
      p.complexity = rng3.below(12);
    }
    std::vector<FrontierPoint> front = pareto(pts);
    for (std::size_t i = 0; i < front.size(); ++i) {
      for (std::size_t j = 0; j < front.size(); ++j) {
        if (i == j) continue;
        const bool geq = front[j].transparency >= front[i].transparency &&
                         front[j].accuracy >= front[i].accuracy;
        const bool strict = front[j].transparency > front[i].transparency ||
                            front[j].accuracy > front[i].accuracy;
        c.require(!(geq && strict),
                  "dominated point survived in trial " + std::to_string(trial));
        if (!c.ok) return c;
      }
    }
  }
  c.detail << "anchors exact, 1000 pareto sets dominance-free";
  return c;
}

Check criterion_frontier_shape() {
  Check c;
  Rng rng(31337);
  Dataset data = synthetic::region_dataset(rng, 2500, 0.05);
  auto [train, test] = split(data, {0.8, 17});

  SweepGrid grid;
  grid.alpha1_values = {0.001, 0.01};
  grid.alpha2_values = {0.02, 0.05, 0.1, 0.2, 0.35, 0.5};
  grid.settings.max_rules_per_side = 300;
  std::vector<FrontierPoint> points =
      sweep(train, test, grid, ModelKind::rules, 42, 2);

  const double bb_accuracy = test.blackbox_agreement();
  double max_low_transparency = 0.0;
  for (const FrontierPoint& p : points) {
    c.require(!p.failed, "sweep cell failed");
    if (p.transparency <= 0.8 + 1e-9) {
      max_low_transparency = std::max(max_low_transparency, p.transparency);
      c.require(p.accuracy >= bb_accuracy - 0.01 - 1e-9,
                "accuracy " + fmt(p.accuracy) + " at transparency " +
                    fmt(p.transparency) + " fell more than 0.01 below " +
                    fmt(bb_accuracy));
    }
  }
  c.detail << "flat within 0.01 of " << fmt(bb_accuracy)
           << " up to transparency " << fmt(max_low_transparency);
  return c;
}

Check criterion_determinism() {
  Check c;
  const fs::path dir =
      fs::temp_directory_path() /
      ("hpm_verify_" + std::to_string(
                           std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(dir);
  Rng rng(55);
  Dataset data = synthetic::region_dataset(rng, 300, 0.1);
  const std::string csv = (dir / "data.csv").string();
  save_dataset(data, csv);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto run_cli = [&](const std::vector<std::string>& args) {
    return cli::run(args);
  };

  const std::string m1 = (dir / "m1.json").string();
  const std::string m2 = (dir / "m2.json").string();
  for (const std::string& out : {m1, m2}) {
    const int rc = run_cli({"train-rules", "--data", csv, "--out", out,
                            "--iters", "300", "--restarts", "2", "--seed",
                            "9"});
    c.require(rc == 0, "train-rules exited with " + std::to_string(rc));
  }
  c.require(slurp(m1) == slurp(m2), "train-rules is not byte-reproducible");

  const std::string l1 = (dir / "l1.json").string();
  const std::string l2 = (dir / "l2.json").string();
  for (const std::string& out : {l1, l2}) {
    const int rc = run_cli({"train-linear", "--data", csv, "--out", out,
                            "--iters", "400", "--seed", "9"});
    c.require(rc == 0, "train-linear exited with " + std::to_string(rc));
  }
  c.require(slurp(l1) == slurp(l2), "train-linear is not byte-reproducible");

  const std::string f1 = (dir / "f1.csv").string();
  const std::string f4 = (dir / "f4.csv").string();
  for (auto [out, jobs] : {std::pair{f1, "1"}, std::pair{f4, "4"}}) {
    const int rc = run_cli({"frontier", "--data", csv, "--out", out,
                            "--alpha1-grid", "0.01,0.05", "--alpha2-grid",
                            "0.05,0.3", "--iters", "200", "--restarts", "1",
                            "--jobs", jobs, "--seed", "9"});
    c.require(rc == 0, "frontier exited with " + std::to_string(rc));
  }
  c.require(slurp(f1) == slurp(f4), "frontier output depends on --jobs");

  fs::remove_all(dir);
  if (c.ok) c.detail << "training and sweep outputs byte-identical";
  return c;
}

struct Criterion {
  int index;
  std::string name;
  double time_limit_s;
  std::function<Check()> fn;
};

}  // namespace

std::vector<CriterionResult> run_criteria() {
  // instances shared by criteria 2-4; generated lazily inside criterion 2
  auto tiny_runs = std::make_shared<std::vector<TinyRun>>();

  const std::vector<Criterion> criteria = {
      {1, "error-formula equivalence", 5.0, criterion_error_formula},
      {2, "brute-force optimality", 60.0,
       [tiny_runs] {
         *tiny_runs = run_tiny_instances();
         return criterion_brute_force(*tiny_runs);
       }},
      {3, "support-bound pruning soundness", 120.0,
       [tiny_runs] { return criterion_support_bound(*tiny_runs); }},
      {4, "search-chain bound consistency", 60.0,
       [tiny_runs] { return criterion_chain_bounds(*tiny_runs); }},
      {5, "gradient check", 5.0, criterion_gradient},
      {6, "smoothing sandwich", 5.0, criterion_sandwich},
      {7, "APG convergence", 30.0, criterion_apg},
      {8, "frontier anchors", 60.0, criterion_frontier_anchors},
      {9, "qualitative frontier shape", 120.0, criterion_frontier_shape},
      {10, "seeded determinism", 120.0, criterion_determinism},
  };

  std::vector<CriterionResult> results;
  for (const Criterion& cr : criteria) {
    CriterionResult r;
    r.index = cr.index;
    r.name = cr.name;
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = cr.fn();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << "exception: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    if (r.seconds > cr.time_limit_s) {
      check.ok = false;
      check.detail << " (exceeded " << cr.time_limit_s << "s budget)";
    }
    r.passed = check.ok;
    r.detail = check.detail.str();
    results.push_back(std::move(r));
  }
  return results;
}

bool run_all(std::ostream& out) {
  bool all = true;
  for (const CriterionResult& r : run_criteria()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", r.seconds);
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.index << " " << r.name
        << " (" << buf << "s)";
    if (!r.detail.empty()) out << ": " << r.detail;
    out << "\n";
    all = all && r.passed;
  }
  out << (all ? "all criteria passed\n" : "some criteria FAILED\n");
  return all;
}

}  // namespace acceptance
}  // namespace hpm

#include <doctest.h>

#include <cmath>

#include "hpm/errors.hpp"
#include "hpm/oracle.hpp"
#include "hpm/rng.hpp"
#include "hpm/synthetic.hpp"
#include "support.hpp"

using namespace hpm;
using test_support::make_binary;

TEST_CASE("brute force over an empty pool returns the empty pair") {
  BinaryDataset d = make_binary({"0", "0", "0"}, {1, -1, 1}, {-1, -1, 1});
  CandidatePool pool;
  auto best = oracle::brute_force_ruleset(pool, d, 0.1, 0.1, 3);
  CHECK(best.pair.empty());
  CHECK(best.objective == misclassification_error(RuleSetPair{}, d));
}

TEST_CASE("a rule covering all positives exactly wins when cheap enough") {
  // 10 rows, 4 positives covered by c0, black-box wrong on the positives
  BinaryDataset d = make_binary(
      {"1", "1", "1", "1", "0", "0", "0", "0", "0", "0"},
      {1, 1, 1, 1, -1, -1, -1, -1, -1, -1},
      {-1, -1, -1, -1, -1, -1, -1, -1, -1, -1});
  CandidatePool pool = mine_candidates(d, 1, 0.0, 0.0, 10);
  auto cheap = oracle::brute_force_ruleset(pool, d, 0.3, 0.2, 2);
  REQUIRE(cheap.pair.positive.size() == 1);
  CHECK(cheap.pair.positive[0] == Rule{{0}});
  // error drop 0.4 plus transparency gain 0.2*0.4 beats the cost 0.3
  CHECK(cheap.objective == doctest::Approx(0.3 - 0.2 * 0.4));

  auto expensive = oracle::brute_force_ruleset(pool, d, 1.3, 0.2, 2);
  CHECK(expensive.pair.empty());  // alpha1 > 1 + alpha2
}

TEST_CASE("brute force rejects oversized subset spaces") {
  Rng rng(71);
  BinaryDataset d = synthetic::random_binary_dataset(rng, 20, 6, 0.2);
  CandidatePool pool = enumerate_rule_universe(d, 3);
  REQUIRE(pool.positive.size() == 41);
  CHECK_THROWS_AS(oracle::brute_force_ruleset(pool, d, 0.1, 0.1, 41),
                  ValidationError);
}

TEST_CASE("simulate_process reproduces the routing semantics") {
  BinaryDataset d = make_binary({"10", "10", "01", "00"}, {1, 1, -1, -1},
                                {1, -1, -1, 1});
  RuleSetPair perfect;
  perfect.positive = {Rule{{0}}};
  perfect.negative = {Rule{{1}}};
  auto sim = oracle::simulate_process(perfect, d);
  CHECK(sim.transparency == doctest::Approx(0.75));
  CHECK(sim.error == doctest::Approx(0.25));  // row 3 goes to a wrong black-box

  auto empty = oracle::simulate_process(RuleSetPair{}, d);
  CHECK(empty.transparency == 0.0);
  CHECK(empty.error == doctest::Approx(0.5));

  BinaryDataset all = make_binary({"10", "01"}, {1, -1}, {-1, 1});
  RuleSetPair full;
  full.positive = {Rule{{0}}};
  full.negative = {Rule{{1}}};
  auto best = oracle::simulate_process(full, all);
  CHECK(best.error == 0.0);
  CHECK(best.transparency == 1.0);
}

TEST_CASE("finite differences recover simple gradients") {
  auto quadratic = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += 0.5 * v * v;
    return s;
  };
  auto g = oracle::finite_diff(quadratic, {0.3, -1.2, 2.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(0.3));
  CHECK(g[1] == doctest::Approx(-1.2));
  CHECK(g[2] == doctest::Approx(2.0));

  auto constant = [](const std::vector<double>&) { return 4.2; };
  for (double v : oracle::finite_diff(constant, {1.0, 2.0}, 1e-5))
    CHECK(v == 0.0);
}

TEST_CASE("a huge sparsity penalty forces the grid optimum to w = 0") {
  Dataset d = synthetic::one_feature_fixture();
  auto best = oracle::grid_minimize_linear(d, 50.0, 0.1,
                                           {LossKind::hinge, 1e-4}, 40);
  CHECK(best.w[0] == 0.0);
}

TEST_CASE("refining the resolution never raises the grid minimum") {
  Dataset d = synthetic::one_feature_fixture();
  const LossSpec spec{LossKind::hinge, 1e-4};
  const double coarse =
      oracle::grid_minimize_linear(d, 0.05, 0.1, spec, 20).objective;
  const double fine =
      oracle::grid_minimize_linear(d, 0.05, 0.1, spec, 40).objective;
  const double finer =
      oracle::grid_minimize_linear(d, 0.05, 0.1, spec, 80).objective;
  CHECK(fine <= coarse);
  CHECK(finer <= fine);
}

TEST_CASE("on separable data a large gap penalty reaches transparency one") {
  // single feature, labels split at zero, black-box irrelevant
  Dataset d;
  d.n = 8;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {-1.6, -1.2, -0.8, -0.4, 0.4, 0.8, 1.2, 1.6};
  d.features.push_back(col);
  d.labels = {-1, -1, -1, -1, 1, 1, 1, 1};
  d.blackbox_labels = {1, 1, 1, 1, -1, -1, -1, -1};
  auto best = oracle::grid_minimize_linear(d, 0.01, 2.0,
                                           {LossKind::hinge, 1e-4}, 80);
  HybridLinearModel m;
  m.features = {{"x", false, ""}};
  m.weights = best.w;
  m.theta_plus = best.theta_plus;
  m.theta_minus = best.theta_minus;
  m.standardization = {{0.0}, {1.0}};
  auto sim = oracle::simulate_process(m, d);
  CHECK(sim.transparency == 1.0);
  CHECK(sim.error == 0.0);
}

TEST_CASE("grid oracle rejects more than two features") {
  Rng rng(72);
  Dataset d = synthetic::random_numeric_dataset(rng, 10, 3);
  CHECK_THROWS_AS(
      oracle::grid_minimize_linear(d, 0.1, 0.1, {LossKind::hinge, 1e-4}, 10),
      ValidationError);
}

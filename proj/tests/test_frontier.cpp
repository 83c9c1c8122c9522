#include <doctest.h>

#include <sstream>

#include "hpm/frontier.hpp"
#include "hpm/oracle.hpp"
#include "hpm/rng.hpp"
#include "hpm/synthetic.hpp"
#include "support.hpp"

using namespace hpm;

namespace {

Dataset tiny_raw() {
  return test_support::load_csv(
      "f,g,label,blackbox\n"
      "a,0,1,1\n"
      "a,1,1,0\n"
      "b,0,0,0\n"
      "b,1,0,1\n"
      "a,0,1,1\n"
      "b,1,0,0\n"
      "a,1,1,1\n"
      "b,0,0,0\n");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("evaluating an empty rule model anchors the black-box extreme") {
  Dataset d = tiny_raw();
  HybridRuleSetModel empty;
  empty.condition_schema = binarize(d).conditions;
  FrontierPoint p = evaluate(Model{empty}, d);
  CHECK(p.transparency == 0.0);
  CHECK(p.accuracy == d.blackbox_agreement());
  CHECK(p.complexity == 0);
}

TEST_CASE("a closed linear band has transparency one") {
  Rng rng(61);
  Dataset d = synthetic::random_numeric_dataset(rng, 30, 1);
  HybridLinearModel m;
  m.features = {{"x0", false, ""}};
  m.weights = {1.0};
  m.theta_plus = m.theta_minus = 0.1;
  m.standardization = {{0.0}, {1.0}};
  FrontierPoint p = evaluate(Model{m}, d);
  CHECK(p.transparency == 1.0);
  CHECK(p.complexity == 1);
}

TEST_CASE("evaluate matches a row-by-row routing simulation") {
  Dataset d = tiny_raw();
  BinaryDataset bits = binarize(d);
  CandidatePool pool = mine_candidates(bits, 2, 0.05, 0.2, 20);
  RuleSearchConfig cfg;
  cfg.iterations = 600;
  HybridRuleSetModel model = train_ruleset(bits, pool, 0.05, 0.2, cfg, 4);
  FrontierPoint p = evaluate(Model{model}, d);
  auto sim = oracle::simulate_process(model.pair, bits);
  CHECK(p.transparency == sim.transparency);
  CHECK(p.accuracy == doctest::Approx(1.0 - sim.error));
  FrontierPoint again = evaluate(Model{model}, d);
  CHECK(again.accuracy == p.accuracy);
  CHECK(again.transparency == p.transparency);
}

TEST_CASE("sweep yields one point per cell plus the endpoint, independent of jobs") {
  Rng rng(62);
  Dataset data = synthetic::region_dataset(rng, 200, 0.1);
  auto [train, test] = split(data, {0.8, 5});
  SweepGrid grid;
  grid.alpha1_values = {0.02, 0.05, 0.2};
  grid.alpha2_values = {0.05, 0.3};
  grid.settings.search.iterations = 150;
  grid.settings.search.restarts = 1;
  grid.settings.max_rules_per_side = 30;
  auto seq = sweep(train, test, grid, ModelKind::rules, 3, 1);
  CHECK(seq.size() == 7);
  auto par = sweep(train, test, grid, ModelKind::rules, 3, 4);
  CHECK(frontier_to_csv(seq) == frontier_to_csv(par));
  for (std::size_t i = 2; i < seq.size(); ++i) {
    const bool ordered = seq[i - 1].alpha2 < seq[i].alpha2 ||
                         (seq[i - 1].alpha2 == seq[i].alpha2 &&
                          seq[i - 1].alpha1 <= seq[i].alpha1);
    CHECK(ordered);
  }
}

TEST_CASE("a dominating size penalty pins every cell at transparency zero") {
  Rng rng(63);
  Dataset data = synthetic::region_dataset(rng, 150, 0.1);
  auto [train, test] = split(data, {0.8, 5});
  SweepGrid grid;
  grid.alpha1_values = {2.0, 3.0};
  grid.alpha2_values = {0.1, 0.4};
  grid.settings.search.iterations = 100;
  grid.settings.search.restarts = 1;
  auto points = sweep(train, test, grid, ModelKind::rules, 3, 1);
  for (const FrontierPoint& p : points) {
    CHECK(p.transparency == 0.0);
    CHECK(p.complexity == 0);
  }
}

TEST_CASE("sweep can persist per-cell models") {
  Rng rng(64);
  Dataset data = synthetic::region_dataset(rng, 150, 0.1);
  auto [train, test] = split(data, {0.8, 5});
  test_support::TempDir tmp;
  SweepGrid grid;
  grid.alpha1_values = {0.05};
  grid.alpha2_values = {0.2};
  grid.settings.search.iterations = 100;
  grid.settings.search.restarts = 1;
  grid.settings.models_dir = tmp.path("");
  auto points = sweep(train, test, grid, ModelKind::rules, 3, 1);
  REQUIRE(points.size() == 2);
  CHECK(points[0].model_path.empty());  // the endpoint has no model file
  REQUIRE(!points[1].model_path.empty());
  Model reloaded = load_model(points[1].model_path);
  FrontierPoint again = evaluate(reloaded, test);
  CHECK(again.transparency == points[1].transparency);
  CHECK(again.accuracy == points[1].accuracy);
}

TEST_CASE("pareto drops dominated points and keeps the simpler duplicate") {
  auto mk = [](double t, double a, std::size_t c) {
    FrontierPoint p;
    p.transparency = t;
    p.accuracy = a;
    p.complexity = c;
    return p;
  };
  auto front = pareto({mk(0.0, 0.86, 0), mk(0.5, 0.85, 5), mk(0.4, 0.84, 4)});
  REQUIRE(front.size() == 2);
  CHECK(front[0].transparency == 0.0);
  CHECK(front[1].transparency == 0.5);

  auto single = pareto({mk(0.3, 0.7, 2)});
  REQUIRE(single.size() == 1);

  auto tied = pareto({mk(0.5, 0.8, 9), mk(0.5, 0.8, 7)});
  REQUIRE(tied.size() == 1);
  CHECK(tied[0].complexity == 7);
}

TEST_CASE("frontier CSV has the fixed header and survives a round trip") {
  std::vector<FrontierPoint> points;
  CHECK(frontier_to_csv(points) ==
        "transparency,accuracy,complexity,alpha1,alpha2,kind,model_path\n");

  FrontierPoint p;
  p.transparency = 0.123456789;
  p.accuracy = 0.87654321;
  p.complexity = 4;
  p.alpha1 = 0.001;
  p.alpha2 = 0.5;
  p.model_kind = "rules";
  p.model_path = "m.json";
  points.push_back(p);
  FrontierPoint endpoint;
  endpoint.model_kind = "rules";
  endpoint.accuracy = 0.9;
  points.push_back(endpoint);

  test_support::TempDir tmp;
  const std::string path = tmp.path("frontier.csv");
  export_frontier(points, path);
  auto rows = parse_csv(test_support::slurp(path));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        std::vector<std::string>{"transparency", "accuracy", "complexity",
                                 "alpha1", "alpha2", "kind", "model_path"});
  CHECK(std::stod(rows[1][0]) == doctest::Approx(0.123456789).epsilon(1e-6));
  CHECK(std::stod(rows[1][1]) == doctest::Approx(0.87654321).epsilon(1e-6));
  CHECK(rows[1][2] == "4");
  CHECK(std::stod(rows[1][3]) == doctest::Approx(0.001));
  CHECK(rows[1][5] == "rules");
  CHECK(rows[1][6] == "m.json");
  CHECK(rows[2][2] == "0");  // the endpoint stays at complexity 0
}

#include "hpm/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hpm/acceptance.hpp"
#include "hpm/dataset.hpp"
#include "hpm/errors.hpp"
#include "hpm/frontier.hpp"
#include "hpm/model_io.hpp"
#include "hpm/oracle.hpp"

namespace hpm {
namespace cli {

namespace {

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw ValidationError(flag + ": empty list");
  return values;
}

struct DataFlags {
  std::string path;
  std::string label = "label";
  std::string blackbox = "blackbox";

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", path, "input CSV file")->required();
    cmd->add_option("--label", label, "name of the true-label column");
    cmd->add_option("--blackbox", blackbox,
                    "name of the black-box prediction column");
  }
  Dataset load() const { return load_dataset(path, label, blackbox); }
};

struct RuleTrainFlags {
  double alpha1 = 0.01;
  double alpha2 = 0.1;
  std::size_t max_len = 4;
  std::size_t max_rules = 5000;
  std::string quantiles = "0.25,0.5,0.75";
  RuleSearchConfig search;

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha1", alpha1, "condition-count penalty");
    cmd->add_option("--alpha2", alpha2, "transparency reward");
    cmd->add_option("--max-len", max_len, "maximum rule length");
    cmd->add_option("--max-rules", max_rules, "candidate pool cap per side");
    cmd->add_option("--quantiles", quantiles,
                    "numeric binarization quantiles (comma separated)");
    cmd->add_option("--iters", search.iterations, "search iterations per chain");
    cmd->add_option("--c0", search.base_temperature, "base temperature");
    cmd->add_option("--restarts", search.restarts, "independent chains");
    cmd->add_option("--exploration", search.exploration,
                    "probability of a uniform rule choice");
  }
};

struct LinearTrainFlags {
  double alpha1 = 0.02;
  double alpha2 = 0.1;
  std::string loss = "hinge";
  double mu = 1e-4;
  ApgConfig apg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha1", alpha1, "L1 penalty");
    cmd->add_option("--alpha2", alpha2, "threshold-gap penalty");
    cmd->add_option("--loss", loss, "hinge | smoothed_hinge | logistic");
    cmd->add_option("--mu", mu, "smoothing parameter");
    cmd->add_option("--iters", apg.max_iterations, "maximum iterations");
    cmd->add_option("--tol", apg.tolerance, "relative stopping tolerance");
    cmd->add_option("--eta0", apg.eta0, "initial step length");
    cmd->add_option("--alpha0", apg.alpha0, "initial momentum parameter");
  }
  LossSpec spec() const { return {loss_kind_from_name(loss), mu}; }
};

void print_point(const FrontierPoint& p, std::ostream& out) {
  char buf[64];
  auto fixed6 = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  out << "transparency=" << fixed6(p.transparency) << "\n"
      << "accuracy=" << fixed6(p.accuracy) << "\n"
      << "complexity=" << p.complexity << "\n";
  if (p.interpretable_accuracy >= 0.0)
    out << "interpretable_accuracy=" << fixed6(p.interpretable_accuracy) << "\n";
  if (p.blackbox_accuracy >= 0.0)
    out << "blackbox_accuracy=" << fixed6(p.blackbox_accuracy) << "\n";
}

int run_or_report(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"hybrid interpretable/black-box model trainer"};
  app.require_subcommand(1);

  int exit_code = 0;

  // ---- mine ----------------------------------------------------------
  auto* mine_cmd = app.add_subcommand(
      "mine", "mine candidate rules and dump them as text");
  auto mine_data = std::make_shared<DataFlags>();
  auto mine_flags = std::make_shared<RuleTrainFlags>();
  auto mine_out = std::make_shared<std::string>();
  mine_data->attach(mine_cmd);
  mine_flags->attach(mine_cmd);
  mine_cmd->add_option("--out", *mine_out, "pool dump file (default: stdout)");
  mine_cmd->callback([=] {
    Dataset d = mine_data->load();
    BinaryDataset bits =
        binarize(d, parse_double_list(mine_flags->quantiles, "--quantiles"));
    CandidatePool pool =
        mine_candidates(bits, mine_flags->max_len, mine_flags->alpha1,
                        mine_flags->alpha2, mine_flags->max_rules);
    std::cerr << "pool: " << pool.positive.size() << " positive, "
              << pool.negative.size() << " negative rules (support floors "
              << pool.min_support_pos << "/" << pool.min_support_neg << ")\n";
    if (mine_out->empty()) {
      dump_pool(pool, bits.conditions, std::cout);
    } else {
      std::ofstream out(*mine_out);
      if (!out) throw ValidationError("cannot write '" + *mine_out + "'");
      dump_pool(pool, bits.conditions, out);
    }
  });

  // ---- train-rules ---------------------------------------------------
  auto* tr_cmd = app.add_subcommand("train-rules",
                                    "train a hybrid rule-set model");
  auto tr_data = std::make_shared<DataFlags>();
  auto tr_flags = std::make_shared<RuleTrainFlags>();
  auto tr_out = std::make_shared<std::string>();
  auto tr_seed = std::make_shared<std::uint64_t>(42);
  tr_data->attach(tr_cmd);
  tr_flags->attach(tr_cmd);
  tr_cmd->add_option("--out", *tr_out, "output model file")->required();
  tr_cmd->add_option("--seed", *tr_seed, "random seed");
  tr_cmd->callback([=] {
    std::cerr << "seed: " << *tr_seed << "\n";
    Dataset d = tr_data->load();
    BinaryDataset bits =
        binarize(d, parse_double_list(tr_flags->quantiles, "--quantiles"));
    CandidatePool pool =
        mine_candidates(bits, tr_flags->max_len, tr_flags->alpha1,
                        tr_flags->alpha2, tr_flags->max_rules);
    HybridRuleSetModel model =
        train_ruleset(bits, pool, tr_flags->alpha1, tr_flags->alpha2,
                      tr_flags->search, *tr_seed);
    std::cerr << "objective: " << model.training_objective << ", rules: "
              << model.pair.positive.size() << "+/"
              << model.pair.negative.size() << "-, conditions: "
              << complexity(model.pair) << "\n";
    save_model(Model{model}, *tr_out);
  });

  // ---- train-linear --------------------------------------------------
  auto* tl_cmd = app.add_subcommand("train-linear",
                                    "train a hybrid two-threshold linear model");
  auto tl_data = std::make_shared<DataFlags>();
  auto tl_flags = std::make_shared<LinearTrainFlags>();
  auto tl_out = std::make_shared<std::string>();
  auto tl_seed = std::make_shared<std::uint64_t>(42);
  tl_data->attach(tl_cmd);
  tl_flags->attach(tl_cmd);
  tl_cmd->add_option("--out", *tl_out, "output model file")->required();
  tl_cmd->add_option("--seed", *tl_seed, "random seed");
  tl_cmd->callback([=] {
    std::cerr << "seed: " << *tl_seed << "\n";
    Dataset d = tl_data->load();
    ApgDiagnostics diag;
    HybridLinearModel model =
        apg_train(d, tl_flags->alpha1, tl_flags->alpha2, tl_flags->spec(),
                  tl_flags->apg, *tl_seed, &diag);
    std::cerr << "objective: " << model.final_objective << " after "
              << diag.iterations << " iterations, nonzero coefficients: "
              << model.nonzero_count() << "\n";
    save_model(Model{model}, *tl_out);
  });

  // ---- predict ---------------------------------------------------------
  auto* pr_cmd = app.add_subcommand("predict", "route rows through a model");
  auto pr_data = std::make_shared<DataFlags>();
  auto pr_model = std::make_shared<std::string>();
  auto pr_out = std::make_shared<std::string>();
  pr_data->attach(pr_cmd);
  pr_cmd->add_option("--model", *pr_model, "model file")->required();
  pr_cmd->add_option("--out", *pr_out, "prediction CSV")->required();
  pr_cmd->callback([=] {
    Dataset d = pr_data->load();
    Model model = load_model(*pr_model);
    std::ofstream out(*pr_out, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + *pr_out + "'");
    out << "row,label,route\n";
    auto emit = [&](std::size_t row, int label, Route route) {
      out << row << "," << label << "," << route_name(route) << "\n";
    };
    if (const auto* rules = std::get_if<HybridRuleSetModel>(&model)) {
      RulePredictor pred(*rules, d);
      for (std::size_t row = 0; row < d.n; ++row) {
        auto [label, route] = pred.predict(row);
        emit(row, label, route);
      }
    } else {
      LinearPredictor pred(std::get<HybridLinearModel>(model), d);
      for (std::size_t row = 0; row < d.n; ++row) {
        auto [label, route] = pred.predict(row);
        emit(row, label, route);
      }
    }
    if (!out) throw ValidationError("write failure on '" + *pr_out + "'");
  });

  // ---- evaluate --------------------------------------------------------
  auto* ev_cmd = app.add_subcommand(
      "evaluate", "report transparency/accuracy/complexity on a dataset");
  auto ev_data = std::make_shared<DataFlags>();
  auto ev_model = std::make_shared<std::string>();
  ev_data->attach(ev_cmd);
  ev_cmd->add_option("--model", *ev_model, "model file")->required();
  ev_cmd->callback([=] {
    Dataset d = ev_data->load();
    Model model = load_model(*ev_model);
    print_point(evaluate(model, d), std::cout);
  });

  // ---- frontier --------------------------------------------------------
  auto* fr_cmd = app.add_subcommand(
      "frontier", "sweep the penalty grid into a transparency-accuracy frontier");
  auto fr_data = std::make_shared<DataFlags>();
  auto fr_flags = std::make_shared<RuleTrainFlags>();
  auto fr_lflags = std::make_shared<LinearTrainFlags>();
  auto fr_kind = std::make_shared<std::string>("rules");
  auto fr_a1 = std::make_shared<std::string>("0.001,0.01,0.06");
  auto fr_a2 = std::make_shared<std::string>("0.001,0.05,0.1,0.2,0.5");
  auto fr_out = std::make_shared<std::string>();
  auto fr_test = std::make_shared<std::string>();
  auto fr_frac = std::make_shared<double>(0.8);
  auto fr_split_seed = std::make_shared<std::uint64_t>(7);
  auto fr_seed = std::make_shared<std::uint64_t>(42);
  auto fr_jobs = std::make_shared<std::size_t>(1);
  auto fr_pareto = std::make_shared<bool>(false);
  auto fr_models_dir = std::make_shared<std::string>();
  fr_data->attach(fr_cmd);
  fr_cmd->add_option("--kind", *fr_kind, "rules | linear");
  fr_cmd->add_option("--alpha1-grid", *fr_a1, "comma-separated alpha1 values");
  fr_cmd->add_option("--alpha2-grid", *fr_a2, "comma-separated alpha2 values");
  fr_cmd->add_option("--out", *fr_out, "frontier CSV")->required();
  fr_cmd->add_option("--test-data", *fr_test,
                     "evaluation CSV (default: split --data)");
  fr_cmd->add_option("--train-frac", *fr_frac, "train fraction when splitting");
  fr_cmd->add_option("--split-seed", *fr_split_seed, "split seed");
  fr_cmd->add_option("--seed", *fr_seed, "training seed");
  fr_cmd->add_option("--jobs", *fr_jobs, "concurrent grid cells");
  fr_cmd->add_flag("--pareto", *fr_pareto, "keep only non-dominated points");
  fr_cmd->add_option("--models-dir", *fr_models_dir,
                     "directory for per-cell model files");
  // trainer knobs for both kinds share flag names where they overlap
  fr_cmd->add_option("--max-len", fr_flags->max_len, "maximum rule length");
  fr_cmd->add_option("--max-rules", fr_flags->max_rules, "pool cap per side");
  fr_cmd->add_option("--quantiles", fr_flags->quantiles, "binarization quantiles");
  fr_cmd->add_option("--iters", fr_flags->search.iterations,
                     "search/APG iterations");
  fr_cmd->add_option("--c0", fr_flags->search.base_temperature, "base temperature");
  fr_cmd->add_option("--restarts", fr_flags->search.restarts, "search restarts");
  fr_cmd->add_option("--loss", fr_lflags->loss, "linear loss kind");
  fr_cmd->add_option("--mu", fr_lflags->mu, "linear smoothing parameter");
  fr_cmd->add_option("--tol", fr_lflags->apg.tolerance, "APG stopping tolerance");
  fr_cmd->callback([=] {
    std::cerr << "seed: " << *fr_seed << "\n";
    Dataset all = fr_data->load();
    Dataset train;
    Dataset test;
    if (fr_test->empty()) {
      std::tie(train, test) = split(all, {*fr_frac, *fr_split_seed});
    } else {
      train = std::move(all);
      test = load_dataset(*fr_test, fr_data->label, fr_data->blackbox);
    }
    SweepGrid grid;
    grid.alpha1_values = parse_double_list(*fr_a1, "--alpha1-grid");
    grid.alpha2_values = parse_double_list(*fr_a2, "--alpha2-grid");
    grid.settings.max_rule_len = fr_flags->max_len;
    grid.settings.max_rules_per_side = fr_flags->max_rules;
    grid.settings.quantiles =
        parse_double_list(fr_flags->quantiles, "--quantiles");
    grid.settings.search = fr_flags->search;
    grid.settings.apg = fr_lflags->apg;
    grid.settings.apg.max_iterations = fr_flags->search.iterations;
    grid.settings.loss = fr_lflags->spec();
    grid.settings.models_dir = *fr_models_dir;
    ModelKind kind = model_kind_from_name(*fr_kind);
    std::vector<FrontierPoint> points =
        sweep(train, test, grid, kind, *fr_seed, *fr_jobs);
    for (const FrontierPoint& p : points) {
      if (p.failed)
        std::cerr << "cell alpha1=" << p.alpha1 << " alpha2=" << p.alpha2
                  << " failed\n";
    }
    if (*fr_pareto) points = pareto(points);
    export_frontier(points, *fr_out);
    std::cerr << "wrote " << points.size() << " points to " << *fr_out << "\n";
  });

  // ---- verify ----------------------------------------------------------
  auto* vf_cmd = app.add_subcommand(
      "verify", "run the built-in acceptance checks against the oracles");
  vf_cmd->callback([&exit_code] {
    if (!acceptance::run_all(std::cout)) exit_code = 2;
  });

  int rc = run_or_report(app, args);
  return rc != 0 ? rc : exit_code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace cli
}  // namespace hpm

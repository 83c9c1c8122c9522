#include <doctest.h>

#include <cmath>

#include "hpm/errors.hpp"
#include "hpm/linear_model.hpp"
#include "hpm/oracle.hpp"
#include "hpm/rng.hpp"
#include "hpm/synthetic.hpp"
#include "support.hpp"

using namespace hpm;

TEST_CASE("base losses match their closed forms") {
  CHECK(loss_phi(LossKind::logistic, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(loss_phi(LossKind::smoothed_hinge, 0.0) == doctest::Approx(0.5));
  CHECK(loss_phi(LossKind::hinge, 2.0) == 0.0);
  CHECK(loss_phi(LossKind::logistic, -800.0) == doctest::Approx(800.0));
  CHECK(loss_phi(LossKind::logistic, 800.0) == 0.0);
}

TEST_CASE("hinge smoothing follows the clamped maximizer") {
  CHECK(smoothed_phi(LossKind::hinge, 0.5, 0.2) == doctest::Approx(0.4));
  CHECK(smoothed_phi(LossKind::hinge, 0.95, 0.2) == doctest::Approx(0.00625));
  CHECK(smoothed_phi(LossKind::hinge, 1.5, 0.2) == 0.0);
  CHECK(smoothed_phi(LossKind::hinge, 0.5, 0.0) ==
        loss_phi(LossKind::hinge, 0.5));
  CHECK(smoothed_phi(LossKind::logistic, 0.3, 0.2) ==
        loss_phi(LossKind::logistic, 0.3));
  CHECK(smoothed_phi(LossKind::smoothed_hinge, 0.3, 0.2) ==
        loss_phi(LossKind::smoothed_hinge, 0.3));
  CHECK_THROWS_AS(smoothed_phi(LossKind::hinge, 0.5, -0.1), ValidationError);
}

TEST_CASE("smoothed gradients match their closed forms") {
  CHECK(smoothed_phi_grad(LossKind::hinge, 0.95, 0.2) == doctest::Approx(-0.25));
  CHECK(smoothed_phi_grad(LossKind::logistic, 0.0, 0.0) == doctest::Approx(-0.5));
  CHECK(smoothed_phi_grad(LossKind::hinge, 3.0, 0.1) == 0.0);
  CHECK(smoothed_phi_grad(LossKind::smoothed_hinge, 0.25, 0.0) ==
        doctest::Approx(-0.75));
  CHECK_THROWS_AS(smoothed_phi_grad(LossKind::hinge, 0.5, 0.0),
                  ValidationError);
}

TEST_CASE("the sandwich inequality holds across smoothing levels") {
  Rng rng(31);
  for (double mu : {1e-4, 1e-2, 0.2}) {
    for (int i = 0; i < 200; ++i) {
      const double z = -3.0 + 6.0 * rng.uniform();
      const double s = smoothed_phi(LossKind::hinge, z, mu);
      const double e = loss_phi(LossKind::hinge, z);
      CHECK(s <= e + 1e-12);
      CHECK(e <= s + mu / 2.0 + 1e-12);
    }
  }
}

TEST_CASE("smoothing is monotone in mu") {
  for (double z : {-2.0, -0.5, 0.3, 0.9, 0.99, 1.0, 1.4}) {
    double prev = smoothed_phi(LossKind::hinge, z, 0.0);
    for (double mu : {1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.5}) {
      const double cur = smoothed_phi(LossKind::hinge, z, mu);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("the partitioned loss charges the threshold the black-box picks") {
  // single instance, y=+1, yb=+1: only theta_minus matters
  Dataset d;
  d.n = 1;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {0.8};
  d.features.push_back(col);
  d.labels = {1};
  d.blackbox_labels = {1};
  const LossSpec spec{LossKind::smoothed_hinge, 0.0};
  const std::vector<double> w{0.5};
  const double base = smoothed_loss(w, 0.7, -0.3, d, spec);
  CHECK(smoothed_loss(w, 5.0, -0.3, d, spec) == base);   // theta_plus inert
  CHECK(smoothed_loss(w, 0.7, -0.9, d, spec) != base);   // theta_minus active
  // hand value: z = 1*(0.5*0.8 - (-0.3)) = 0.7, phi = 0.5*(0.3)^2
  CHECK(base == doctest::Approx(0.5 * 0.3 * 0.3));
}

TEST_CASE("the loss at the origin is one half per instance for smoothed hinge") {
  Rng rng(32);
  Dataset d = synthetic::random_numeric_dataset(rng, 7, 2);
  const LossSpec spec{LossKind::smoothed_hinge, 0.0};
  CHECK(smoothed_loss({0.0, 0.0}, 0.0, 0.0, d, spec) == doctest::Approx(0.5));
}

TEST_CASE("a three-instance loss matches the per-term hand sum") {
  Dataset d;
  d.n = 3;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {1.0, -2.0, 0.5};
  d.features.push_back(col);
  d.labels = {1, -1, 1};
  d.blackbox_labels = {1, -1, -1};
  const LossSpec spec{LossKind::hinge, 0.1};
  const std::vector<double> w{0.6};
  const double thp = 0.4;
  const double thm = -0.2;
  const double z0 = 1.0 * (0.6 * 1.0 - thm);   // yb=+1 -> theta_minus
  const double z1 = -1.0 * (0.6 * -2.0 - thp); // yb=-1 -> theta_plus
  const double z2 = 1.0 * (0.6 * 0.5 - thp);   // yb=-1 -> theta_plus
  const double expected = (smoothed_phi(spec.kind, z0, spec.mu) +
                           smoothed_phi(spec.kind, z1, spec.mu) +
                           smoothed_phi(spec.kind, z2, spec.mu)) /
                          3.0;
  CHECK(smoothed_loss(w, thp, thm, d, spec) == doctest::Approx(expected));
}

TEST_CASE("gradients vanish on the flat side of the hinge") {
  Dataset d;
  d.n = 2;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {1.0, 2.0};
  d.features.push_back(col);
  d.labels = {1, 1};
  d.blackbox_labels = {1, 1};
  DesignMatrix m = build_design(d);
  std::vector<double> grad_w;
  double gp = 0.0;
  double gm = 0.0;
  // margins y*(w*x - thm) = 5*x + 10 > 1 everywhere
  loss_gradient({5.0}, 0.0, -10.0, m, {LossKind::hinge, 0.1}, grad_w, gp, gm);
  CHECK(grad_w[0] == 0.0);
  CHECK(gp == 0.0);
  CHECK(gm == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(33);
  for (LossKind kind :
       {LossKind::hinge, LossKind::smoothed_hinge, LossKind::logistic}) {
    const LossSpec spec{kind, 0.05};
    for (int trial = 0; trial < 20; ++trial) {
      Dataset data = synthetic::random_numeric_dataset(rng, 5, 2);
      DesignMatrix m = build_design(data);
      std::vector<double> point(m.d + 2);
      bool clear = false;
      while (!clear) {
        for (std::size_t j = 0; j < point.size(); ++j)
          point[j] = -1.0 + 2.0 * rng.uniform();
        clear = true;
        for (std::size_t r = 0; r < m.n; ++r) {
          double s = 0.0;
          for (std::size_t j = 0; j < m.d; ++j) s += point[j] * m.at(r, j);
          const double theta =
              m.blackbox_labels[r] == 1 ? point[m.d + 1] : point[m.d];
          const double z = m.labels[r] * (s - theta);
          if (std::abs(z - 1.0) < 1e-4 || std::abs(z - (1.0 - spec.mu)) < 1e-4)
            clear = false;
        }
      }
      std::vector<double> w(point.begin(), point.begin() + m.d);
      std::vector<double> grad_w;
      double gp = 0.0;
      double gm = 0.0;
      loss_gradient(w, point[m.d], point[m.d + 1], m, spec, grad_w, gp, gm);
      grad_w.push_back(gp);
      grad_w.push_back(gm);
      auto fd = oracle::finite_diff(
          [&](const std::vector<double>& p) {
            std::vector<double> pw(p.begin(), p.begin() + m.d);
            return smoothed_loss(pw, p[m.d], p[m.d + 1], m, spec);
          },
          point, 1e-6);
      for (std::size_t j = 0; j < fd.size(); ++j)
        CHECK(fd[j] == doctest::Approx(grad_w[j]).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("mirrored instances cancel the weight gradient at the origin") {
  // pairs (x, y, yb) and (-x, y, yb); at w=0 both rows share the margin
  Dataset d;
  d.n = 4;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {1.3, -1.3, -0.4, 0.4};
  d.features.push_back(col);
  d.labels = {1, 1, -1, -1};
  d.blackbox_labels = {1, 1, -1, -1};
  DesignMatrix m = build_design(d);
  std::vector<double> grad_w;
  double gp = 0.0;
  double gm = 0.0;
  loss_gradient({0.0}, 0.6, -0.6, m, {LossKind::hinge, 0.2}, grad_w, gp, gm);
  CHECK(grad_w[0] == doctest::Approx(0.0));
}

TEST_CASE("soft thresholding shrinks toward zero") {
  CHECK(prox_l1({0.5, -0.05, -1.2}, 0.2) ==
        std::vector<double>{0.3, 0.0, -1.0});
  CHECK(prox_l1({0.5, -0.05, -1.2}, 0.0) ==
        std::vector<double>{0.5, -0.05, -1.2});
  CHECK(prox_l1({0.1, -0.2}, 0.3) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("the threshold step projects crossing thresholds to their midpoint") {
  auto [p1, m1] = threshold_step(1.0, -1.0, 0.1, -0.1, 0.05, 0.5);
  CHECK(p1 == doctest::Approx(1.0 - 0.5 * 0.15));
  CHECK(m1 == doctest::Approx(-1.0 - 0.5 * (-0.15)));
  CHECK(p1 >= m1);

  // unconstrained minimizers 0.1 and 0.4 cross; both land on 0.25
  auto [p2, m2] = threshold_step(0.1, 0.4, 0.0, 0.0, 0.0, 1.0);
  CHECK(p2 == doctest::Approx(0.25));
  CHECK(m2 == doctest::Approx(0.25));

  // zero loss gradient: the gap shrinks by 2*eta*alpha2
  auto [p3, m3] = threshold_step(1.0, -1.0, 0.0, 0.0, 0.3, 0.5);
  CHECK((1.0 - -1.0) - (p3 - m3) == doctest::Approx(2 * 0.5 * 0.3));
}

TEST_CASE("momentum recursion solves its quadratic") {
  auto [a1, b1] = momentum_update(1.0);
  CHECK(a1 == doctest::Approx(0.618034).epsilon(1e-6));
  CHECK(b1 == doctest::Approx(0.0));
  auto [a2, b2] = momentum_update(0.5);
  CHECK(a2 == doctest::Approx(0.390388).epsilon(1e-6));
  CHECK(b2 == doctest::Approx(0.390388).epsilon(1e-6));

  double alpha = 0.9;
  for (int i = 0; i < 50; ++i) {
    auto [next, beta] = momentum_update(alpha);
    CHECK(next > 0.0);
    CHECK(next < alpha);
    CHECK(next * next == doctest::Approx((1.0 - next) * alpha * alpha));
    alpha = next;
  }
}

TEST_CASE("a dominant gap penalty collapses the black-box band") {
  Rng rng(34);
  Dataset d = synthetic::two_blob_dataset(rng, 120, 3, 0.1);
  ApgConfig cfg;
  cfg.tolerance = 1e-8;
  HybridLinearModel m =
      apg_train(d, 0.001, 5.0, {LossKind::hinge, 1e-4}, cfg, 1);
  CHECK(m.theta_plus == m.theta_minus);
  auto sim = oracle::simulate_process(m, d);
  CHECK(sim.transparency == 1.0);
}

TEST_CASE("apg training is deterministic") {
  Rng rng(35);
  Dataset d = synthetic::two_blob_dataset(rng, 80, 4, 0.1);
  ApgConfig cfg;
  HybridLinearModel a = apg_train(d, 0.02, 0.1, {LossKind::hinge, 1e-4}, cfg, 7);
  HybridLinearModel b = apg_train(d, 0.02, 0.1, {LossKind::hinge, 1e-4}, cfg, 7);
  CHECK(a.weights == b.weights);
  CHECK(a.theta_plus == b.theta_plus);
  CHECK(a.theta_minus == b.theta_minus);
  CHECK(a.final_objective == b.final_objective);
}

TEST_CASE("returned iterates are feasible and best-objective bookkeeping holds") {
  Rng rng(36);
  Dataset d = synthetic::two_blob_dataset(rng, 60, 2, 0.2);
  ApgConfig cfg;
  cfg.max_iterations = 300;
  ApgDiagnostics diag;
  HybridLinearModel m =
      apg_train(d, 0.05, 0.2, {LossKind::hinge, 1e-4}, cfg, 3, &diag);
  CHECK(m.theta_plus >= m.theta_minus);
  CHECK(diag.best_objective <= diag.final_objective + 1e-15);
  CHECK(diag.best_objective <= diag.initial_objective + 1e-15);
  CHECK(m.final_objective == diag.best_objective);
}

TEST_CASE("apg tracks the dense-grid reference on one feature") {
  Dataset fixture = synthetic::one_feature_fixture();
  const LossSpec spec{LossKind::hinge, 1e-4};
  ApgConfig cfg;
  cfg.tolerance = 1e-9;
  HybridLinearModel m = apg_train(fixture, 0.05, 0.1, spec, cfg, 42);
  auto grid = oracle::grid_minimize_linear(fixture, 0.05, 0.1, spec, 200,
                                           {-2, 2, -2, 2});
  CHECK(m.final_objective <= grid.objective + 1e-3);
}

TEST_CASE("objective_F composes loss, sparsity and gap terms") {
  Rng rng(37);
  Dataset d = synthetic::random_numeric_dataset(rng, 9, 2);
  HybridLinearModel m;
  m.features = {{"x0", false, ""}, {"x1", false, ""}};
  m.weights = {0.4, -0.3};
  m.theta_plus = 0.5;
  m.theta_minus = -0.1;
  m.standardization = {{0.0, 0.0}, {1.0, 1.0}};
  m.loss = {LossKind::hinge, 0.05};
  const double f = objective_F(m, d, 0.2, 0.3, m.loss);
  const double expected =
      smoothed_loss(m.weights, m.theta_plus, m.theta_minus, d, m.loss) +
      0.2 * 0.7 + 0.3 * 0.6;
  CHECK(f == doctest::Approx(expected));

  // loss only when w = 0 and the band is closed
  HybridLinearModel zero = m;
  zero.weights = {0.0, 0.0};
  zero.theta_plus = zero.theta_minus = 0.2;
  CHECK(objective_F(zero, d, 0.2, 0.3, zero.loss) ==
        doctest::Approx(smoothed_loss(zero.weights, 0.2, 0.2, d, zero.loss)));

  // a zero-coefficient feature changes nothing
  Dataset wider = d;
  FeatureColumn extra;
  extra.name = "x2";
  extra.kind = FeatureKind::numeric;
  extra.numeric.assign(d.n, 3.25);
  wider.features.push_back(extra);
  HybridLinearModel padded = m;
  padded.features.push_back({"x2", false, ""});
  padded.weights.push_back(0.0);
  padded.standardization.mean.push_back(0.0);
  padded.standardization.scale.push_back(1.0);
  CHECK(objective_F(padded, wider, 0.2, 0.3, padded.loss) ==
        doctest::Approx(f));
}

TEST_CASE("linear routing follows the two thresholds") {
  Dataset d;
  d.n = 3;
  FeatureColumn col;
  col.name = "x";
  col.kind = FeatureKind::numeric;
  col.numeric = {2.0, 0.5, -1.0};
  d.features.push_back(col);
  d.labels = {1, 1, -1};
  d.blackbox_labels = {-1, -1, 1};
  HybridLinearModel m;
  m.features = {{"x", false, ""}};
  m.weights = {1.0};
  m.theta_plus = 1.0;
  m.theta_minus = 0.0;
  m.standardization = {{0.0}, {1.0}};

  auto [l0, r0] = predict_linear(m, d, 0, d.blackbox_labels[0]);
  CHECK(l0 == 1);
  CHECK(r0 == Route::linear);
  auto [l1, r1] = predict_linear(m, d, 1, d.blackbox_labels[1]);
  CHECK(l1 == -1);  // the black-box vote
  CHECK(r1 == Route::blackbox);

  m.theta_plus = m.theta_minus = 0.3;
  for (std::size_t row = 0; row < d.n; ++row) {
    auto [label, route] = predict_linear(m, d, row, d.blackbox_labels[row]);
    CHECK(route == Route::linear);
    (void)label;
  }
}

TEST_CASE("shrinking the band never sheds linear routing") {
  Rng rng(38);
  Dataset d = synthetic::random_numeric_dataset(rng, 40, 2);
  HybridLinearModel wide;
  wide.features = {{"x0", false, ""}, {"x1", false, ""}};
  wide.weights = {0.8, -0.6};
  wide.theta_plus = 0.9;
  wide.theta_minus = -0.7;
  wide.standardization = {{0.0, 0.0}, {1.0, 1.0}};
  HybridLinearModel narrow = wide;
  narrow.theta_plus = 0.5;
  narrow.theta_minus = -0.2;
  LinearPredictor wide_pred(wide, d);
  LinearPredictor narrow_pred(narrow, d);
  for (std::size_t row = 0; row < d.n; ++row) {
    if (wide_pred.predict(row).second == Route::linear)
      CHECK(narrow_pred.predict(row).second == Route::linear);
  }
}

TEST_CASE("the objective is midpoint-convex along random segments") {
  Rng rng(39);
  Dataset d = synthetic::random_numeric_dataset(rng, 12, 2);
  DesignMatrix m = build_design(d);
  const LossSpec spec{LossKind::hinge, 0.05};
  const double a1 = 0.1;
  const double a2 = 0.2;
  auto full = [&](const std::vector<double>& p) {
    std::vector<double> w(p.begin(), p.begin() + m.d);
    double l1 = 0.0;
    for (double v : w) l1 += std::abs(v);
    return smoothed_loss(w, p[m.d], p[m.d + 1], m, spec) + a1 * l1 +
           a2 * (p[m.d] - p[m.d + 1]);
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(m.d + 2);
    std::vector<double> q(m.d + 2);
    std::vector<double> mid(m.d + 2);
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = -1.5 + 3.0 * rng.uniform();
      q[j] = -1.5 + 3.0 * rng.uniform();
      mid[j] = 0.5 * (p[j] + q[j]);
    }
    CHECK(full(mid) <= 0.5 * (full(p) + full(q)) + 1e-12);
  }
}

TEST_CASE("default stopping does not fire during the line-search warmup") {
  // mu = 1e-4 makes early iterations tiny; the window check must not mistake
  // that for convergence
  Rng rng(41);
  Dataset d = synthetic::two_blob_dataset(rng, 500, 4, 0.15);
  ApgConfig cfg;  // defaults
  ApgDiagnostics diag;
  apg_train(d, 0.01, 0.1, {LossKind::hinge, 1e-4}, cfg, 2, &diag);
  CHECK(diag.iterations >= cfg.min_iterations);

  ApgConfig tight = cfg;
  tight.tolerance = 1e-9;
  ApgDiagnostics tight_diag;
  apg_train(d, 0.01, 0.1, {LossKind::hinge, 1e-4}, tight, 2, &tight_diag);
  CHECK(diag.best_objective <=
        tight_diag.best_objective +
            0.01 * std::max(std::abs(tight_diag.best_objective), 1.0));
}

TEST_CASE("hinge training requires a positive smoothing parameter") {
  Rng rng(40);
  Dataset d = synthetic::two_blob_dataset(rng, 20, 2, 0.1);
  ApgConfig cfg;
  CHECK_THROWS_AS(apg_train(d, 0.1, 0.1, {LossKind::hinge, 0.0}, cfg, 1),
                  ValidationError);
}

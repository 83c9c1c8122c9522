#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hpm/dataset.hpp"
#include "hpm/ruleset_model.hpp"

namespace hpm {

enum class LossKind { hinge, smoothed_hinge, logistic };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct LossSpec {
  LossKind kind = LossKind::hinge;
  double mu = 1e-4;  // smoothing parameter; only the hinge uses it
};

double loss_phi(LossKind kind, double z);
double smoothed_phi(LossKind kind, double z, double mu);
double smoothed_phi_grad(LossKind kind, double z, double mu);

// Model feature: either a raw numeric column or a categorical indicator
// (value == token), produced by the one-hot expansion at training time.
struct LinearFeature {
  std::string feature;
  bool indicator = false;
  std::string token;

  std::string display_name() const {
    return indicator ? feature + "==" + token : feature;
  }
  friend bool operator==(const LinearFeature&, const LinearFeature&) = default;
};

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // always > 0
  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct HybridLinearModel {
  std::vector<LinearFeature> features;
  std::vector<double> weights;
  double theta_plus = 1.0;
  double theta_minus = -1.0;
  Standardization standardization;
  LossSpec loss;
  double final_objective = 0.0;

  std::size_t nonzero_count() const;
};

// Row-major design matrix with the label/black-box columns alongside.
struct DesignMatrix {
  std::vector<LinearFeature> features;
  std::vector<double> values;  // n x d, row-major
  std::vector<int> labels;
  std::vector<int> blackbox_labels;
  std::size_t n = 0;
  std::size_t d = 0;

  double at(std::size_t row, std::size_t col) const {
    return values[row * d + col];
  }
};

// Numeric columns pass through; categorical columns expand to 0/1 indicators
// per distinct value (sorted).
DesignMatrix build_design(const Dataset& d);

// Z-scores each column in place (population std; constant columns keep
// scale 1) and returns the transform.
Standardization standardize_in_place(DesignMatrix& m);

// Partitioned loss over the black-box split: rows the black-box votes +1 are
// charged against theta_minus, the rest against theta_plus.
double smoothed_loss(const std::vector<double>& w, double theta_plus,
                     double theta_minus, const DesignMatrix& m,
                     const LossSpec& spec);
void loss_gradient(const std::vector<double>& w, double theta_plus,
                   double theta_minus, const DesignMatrix& m,
                   const LossSpec& spec, std::vector<double>& grad_w,
                   double& grad_theta_plus, double& grad_theta_minus);

// Dataset convenience wrappers (no standardization applied).
double smoothed_loss(const std::vector<double>& w, double theta_plus,
                     double theta_minus, const Dataset& d,
                     const LossSpec& spec);
void loss_gradient(const std::vector<double>& w, double theta_plus,
                   double theta_minus, const Dataset& d, const LossSpec& spec,
                   std::vector<double>& grad_w, double& grad_theta_plus,
                   double& grad_theta_minus);

std::vector<double> prox_l1(const std::vector<double>& v, double t);

// Constrained proximal step on the two thresholds; projects to the midpoint
// when the unconstrained minimizer crosses.
std::pair<double, double> threshold_step(double theta_plus_hat,
                                         double theta_minus_hat,
                                         double grad_plus, double grad_minus,
                                         double alpha2, double eta);

// alpha_t from alpha_t^2 = (1-alpha_t) * alpha_prev^2 and the matching
// extrapolation weight.
std::pair<double, double> momentum_update(double alpha_prev);

struct ApgConfig {
  double eta0 = 1.0;
  double alpha0 = 0.5;
  std::size_t max_iterations = 5000;
  double tolerance = 1e-4;  // relative objective change over a 10-step window
  // The first iterations move slowly while the line search finds the step
  // scale (the smoothed hinge has curvature 1/mu); the window check is
  // suppressed until this many iterations have run.
  std::size_t min_iterations = 100;
  double shrink = 0.5;
  double grow = 2.0;
};

struct ApgDiagnostics {
  std::size_t iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;  // objective of the last iterate
  double best_objective = 0.0;   // objective of the returned iterate
};

HybridLinearModel apg_train(const Dataset& d, double alpha1, double alpha2,
                            const LossSpec& spec, const ApgConfig& cfg,
                            std::uint64_t seed,
                            ApgDiagnostics* diagnostics = nullptr);

// F = smoothed loss + alpha1*||w||_1 + alpha2*(theta_plus - theta_minus),
// evaluated through the model's stored standardization.
double objective_F(const HybridLinearModel& m, const Dataset& d, double alpha1,
                   double alpha2, const LossSpec& spec);

std::pair<int, Route> predict_linear(const HybridLinearModel& m,
                                     const Dataset& d, std::size_t row,
                                     int blackbox_label);

// Resolves the model's features against a dataset once, then routes rows.
class LinearPredictor {
 public:
  LinearPredictor(const HybridLinearModel& model, const Dataset& data);
  double score(std::size_t row) const;
  std::pair<int, Route> predict(std::size_t row) const;

 private:
  const HybridLinearModel* model_;
  const Dataset* data_;
  std::vector<std::size_t> feature_idx_;
};

}  // namespace hpm

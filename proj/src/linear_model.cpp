#include "hpm/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hpm/errors.hpp"

namespace hpm {

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::hinge: return "hinge";
    case LossKind::smoothed_hinge: return "smoothed_hinge";
    case LossKind::logistic: return "logistic";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "hinge") return LossKind::hinge;
  if (name == "smoothed_hinge") return LossKind::smoothed_hinge;
  if (name == "logistic") return LossKind::logistic;
  throw ValidationError("unknown loss '" + name + "'");
}

double loss_phi(LossKind kind, double z) {
  switch (kind) {
    case LossKind::hinge:
      return std::max(1.0 - z, 0.0);
    case LossKind::smoothed_hinge: {
      const double h = std::max(1.0 - z, 0.0);
      return 0.5 * h * h;
    }
    case LossKind::logistic:
      // log(1 + exp(-z)) without overflow for large |z|
      return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return 0.0;
}

double smoothed_phi(LossKind kind, double z, double mu) {
  if (mu < 0.0) throw ValidationError("smoothing parameter must be >= 0");
  if (kind != LossKind::hinge || mu == 0.0) return loss_phi(kind, z);
  // sup over a in [-1,0] of (z-1)a - mu*a^2/2; maximizer clamp((z-1)/mu,-1,0)
  const double a = std::clamp((z - 1.0) / mu, -1.0, 0.0);
  return a * (z - 1.0) - 0.5 * mu * a * a;
}

double smoothed_phi_grad(LossKind kind, double z, double mu) {
  if (mu < 0.0) throw ValidationError("smoothing parameter must be >= 0");
  switch (kind) {
    case LossKind::hinge:
      if (mu == 0.0)
        throw ValidationError(
            "hinge loss requires mu > 0 for a well-defined gradient");
      return std::clamp((z - 1.0) / mu, -1.0, 0.0);
    case LossKind::smoothed_hinge:
      return -std::max(1.0 - z, 0.0);
    case LossKind::logistic:
      // -sigmoid(-z), computed stably on both tails
      return z >= 0.0 ? -std::exp(-z) / (1.0 + std::exp(-z))
                      : -1.0 / (1.0 + std::exp(z));
  }
  return 0.0;
}

std::size_t HybridLinearModel::nonzero_count() const {
  std::size_t c = 0;
  for (double w : weights)
    if (w != 0.0) ++c;
  return c;
}

DesignMatrix build_design(const Dataset& d) {
  DesignMatrix m;
  m.n = d.n;
  m.labels = d.labels;
  m.blackbox_labels = d.blackbox_labels;
  std::vector<std::vector<double>> columns;
  for (const FeatureColumn& col : d.features) {
    if (col.kind == FeatureKind::numeric) {
      m.features.push_back({col.name, false, ""});
      columns.push_back(col.numeric);
    } else {
      std::set<std::string> distinct(col.categorical.begin(),
                                     col.categorical.end());
      for (const std::string& v : distinct) {
        m.features.push_back({col.name, true, v});
        std::vector<double> indicator(d.n, 0.0);
        for (std::size_t r = 0; r < d.n; ++r)
          if (col.categorical[r] == v) indicator[r] = 1.0;
        columns.push_back(std::move(indicator));
      }
    }
  }
  m.d = columns.size();
  m.values.resize(m.n * m.d);
  for (std::size_t r = 0; r < m.n; ++r)
    for (std::size_t c = 0; c < m.d; ++c) m.values[r * m.d + c] = columns[c][r];
  return m;
}

Standardization standardize_in_place(DesignMatrix& m) {
  Standardization s;
  s.mean.resize(m.d);
  s.scale.resize(m.d);
  for (std::size_t c = 0; c < m.d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.n; ++r) sum += m.at(r, c);
    const double mean = sum / static_cast<double>(m.n);
    double sq = 0.0;
    for (std::size_t r = 0; r < m.n; ++r) {
      const double dlt = m.at(r, c) - mean;
      sq += dlt * dlt;
    }
    double scale = std::sqrt(sq / static_cast<double>(m.n));
    if (scale == 0.0) scale = 1.0;
    s.mean[c] = mean;
    s.scale[c] = scale;
    for (std::size_t r = 0; r < m.n; ++r)
      m.values[r * m.d + c] = (m.values[r * m.d + c] - mean) / scale;
  }
  return s;
}

namespace {

// Margin of row r: y * (w'x - theta), where theta is theta_minus on rows the
// black-box votes +1 and theta_plus elsewhere.
inline double row_margin(const std::vector<double>& w, double theta_plus,
                         double theta_minus, const DesignMatrix& m,
                         std::size_t r) {
  const double* x = &m.values[r * m.d];
  double s = 0.0;
  for (std::size_t c = 0; c < m.d; ++c) s += w[c] * x[c];
  const double theta = m.blackbox_labels[r] == 1 ? theta_minus : theta_plus;
  return static_cast<double>(m.labels[r]) * (s - theta);
}

}  // namespace

double smoothed_loss(const std::vector<double>& w, double theta_plus,
                     double theta_minus, const DesignMatrix& m,
                     const LossSpec& spec) {
  double total = 0.0;
  for (std::size_t r = 0; r < m.n; ++r)
    total += smoothed_phi(spec.kind, row_margin(w, theta_plus, theta_minus, m, r),
                          spec.mu);
  return total / static_cast<double>(m.n);
}

void loss_gradient(const std::vector<double>& w, double theta_plus,
                   double theta_minus, const DesignMatrix& m,
                   const LossSpec& spec, std::vector<double>& grad_w,
                   double& grad_theta_plus, double& grad_theta_minus) {
  grad_w.assign(m.d, 0.0);
  grad_theta_plus = 0.0;
  grad_theta_minus = 0.0;
  for (std::size_t r = 0; r < m.n; ++r) {
    const double z = row_margin(w, theta_plus, theta_minus, m, r);
    const double g = smoothed_phi_grad(spec.kind, z, spec.mu);
    if (g == 0.0) continue;
    const double y = static_cast<double>(m.labels[r]);
    const double* x = &m.values[r * m.d];
    for (std::size_t c = 0; c < m.d; ++c) grad_w[c] += g * y * x[c];
    if (m.blackbox_labels[r] == 1) {
      grad_theta_minus -= g * y;
    } else {
      grad_theta_plus -= g * y;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(m.n);
  for (double& v : grad_w) v *= inv_n;
  grad_theta_plus *= inv_n;
  grad_theta_minus *= inv_n;
}

double smoothed_loss(const std::vector<double>& w, double theta_plus,
                     double theta_minus, const Dataset& d,
                     const LossSpec& spec) {
  DesignMatrix m = build_design(d);
  if (w.size() != m.d)
    throw ValidationError("weight vector length does not match the design");
  return smoothed_loss(w, theta_plus, theta_minus, m, spec);
}

void loss_gradient(const std::vector<double>& w, double theta_plus,
                   double theta_minus, const Dataset& d, const LossSpec& spec,
                   std::vector<double>& grad_w, double& grad_theta_plus,
                   double& grad_theta_minus) {
  DesignMatrix m = build_design(d);
  if (w.size() != m.d)
    throw ValidationError("weight vector length does not match the design");
  loss_gradient(w, theta_plus, theta_minus, m, spec, grad_w, grad_theta_plus,
                grad_theta_minus);
}

std::vector<double> prox_l1(const std::vector<double>& v, double t) {
  if (t < 0.0) throw ValidationError("soft-threshold step must be >= 0");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

std::pair<double, double> threshold_step(double theta_plus_hat,
                                         double theta_minus_hat,
                                         double grad_plus, double grad_minus,
                                         double alpha2, double eta) {
  if (!(eta > 0.0)) throw ValidationError("step length must be positive");
  const double up = theta_plus_hat - eta * (grad_plus + alpha2);
  const double um = theta_minus_hat - eta * (grad_minus - alpha2);
  if (up >= um) return {up, um};
  const double mid = 0.5 * (up + um);
  return {mid, mid};
}

std::pair<double, double> momentum_update(double alpha_prev) {
  if (!(alpha_prev > 0.0 && alpha_prev <= 1.0))
    throw ValidationError("momentum parameter must lie in (0,1]");
  const double a2 = alpha_prev * alpha_prev;
  // positive root of alpha^2 + a2*alpha - a2 = 0
  const double alpha = 0.5 * (-a2 + std::sqrt(a2 * a2 + 4.0 * a2));
  const double beta = alpha_prev * (1.0 - alpha_prev) / (a2 + alpha);
  return {alpha, beta};
}

namespace {

double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

struct ApgPoint {
  std::vector<double> w;
  double thp = 0.0;
  double thm = 0.0;
};

}  // namespace

HybridLinearModel apg_train(const Dataset& d, double alpha1, double alpha2,
                            const LossSpec& spec, const ApgConfig& cfg,
                            std::uint64_t seed, ApgDiagnostics* diagnostics) {
  (void)seed;  // the solver is deterministic; kept for interface uniformity
  if (alpha1 < 0.0 || alpha2 < 0.0)
    throw ValidationError("alpha1 and alpha2 must be non-negative");
  if (!(cfg.eta0 > 0.0)) throw ValidationError("eta0 must be positive");
  if (!(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0))
    throw ValidationError("alpha0 must lie in (0,1)");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw ValidationError("line-search shrink factor must lie in (0,1)");
  if (cfg.grow < 1.0)
    throw ValidationError("line-search grow factor must be >= 1");
  if (spec.kind == LossKind::hinge && !(spec.mu > 0.0))
    throw ValidationError("hinge loss requires mu > 0");

  DesignMatrix m = build_design(d);
  Standardization stz = standardize_in_place(m);

  auto objective = [&](const ApgPoint& p) {
    return smoothed_loss(p.w, p.thp, p.thm, m, spec) + alpha1 * l1_norm(p.w) +
           alpha2 * (p.thp - p.thm);
  };

  ApgPoint cur{std::vector<double>(m.d, 0.0), 1.0, -1.0};
  ApgPoint prev = cur;
  ApgPoint hat = cur;
  double f_cur = objective(cur);
  ApgPoint best = cur;
  double f_best = f_cur;
  const double f_init = f_cur;

  std::vector<double> f_history{f_cur};
  double eta = cfg.eta0;
  double alpha_prev = cfg.alpha0;
  std::vector<double> grad_w;
  std::size_t t = 1;

  for (; t <= cfg.max_iterations; ++t) {
    double g_thp = 0.0;
    double g_thm = 0.0;
    loss_gradient(hat.w, hat.thp, hat.thm, m, spec, grad_w, g_thp, g_thm);
    const double loss_hat = smoothed_loss(hat.w, hat.thp, hat.thm, m, spec);

    eta *= cfg.grow;
    ApgPoint next;
    double loss_next = 0.0;
    while (true) {
      std::vector<double> shifted(m.d);
      for (std::size_t c = 0; c < m.d; ++c)
        shifted[c] = hat.w[c] - eta * grad_w[c];
      next.w = prox_l1(shifted, eta * alpha1);
      std::tie(next.thp, next.thm) =
          threshold_step(hat.thp, hat.thm, g_thp, g_thm, alpha2, eta);

      loss_next = smoothed_loss(next.w, next.thp, next.thm, m, spec);
      double linear = 0.0;
      double sq = 0.0;
      for (std::size_t c = 0; c < m.d; ++c) {
        const double delta = next.w[c] - hat.w[c];
        linear += grad_w[c] * delta;
        sq += delta * delta;
      }
      const double dp = next.thp - hat.thp;
      const double dm = next.thm - hat.thm;
      linear += g_thp * dp + g_thm * dm;
      sq += dp * dp + dm * dm;
      const double upper = loss_hat + linear + sq / (2.0 * eta) + 1e-12;
      if (loss_next <= upper) break;
      eta *= cfg.shrink;
      if (eta < 1e-18)
        throw std::runtime_error(
            "line search failed to make progress at iteration " +
            std::to_string(t));
    }

    const double f_next =
        loss_next + alpha1 * l1_norm(next.w) + alpha2 * (next.thp - next.thm);
    if (!std::isfinite(f_next))
      throw std::runtime_error("objective became non-finite at iteration " +
                               std::to_string(t));
    if (f_next < f_best) {
      f_best = f_next;
      best = next;
    }

    const bool blew_up =
        f_next - f_cur > 10.0 * cfg.tolerance * std::max(std::abs(f_cur), 1.0);
    prev = cur;
    cur = next;
    f_cur = f_next;
    f_history.push_back(f_cur);

    if (blew_up) {
      // restart: drop the accumulated momentum
      alpha_prev = cfg.alpha0;
      hat = cur;
    } else {
      auto [alpha_t, beta_t] = momentum_update(alpha_prev);
      hat.w.resize(m.d);
      for (std::size_t c = 0; c < m.d; ++c)
        hat.w[c] = cur.w[c] + beta_t * (cur.w[c] - prev.w[c]);
      hat.thp = cur.thp + beta_t * (cur.thp - prev.thp);
      hat.thm = cur.thm + beta_t * (cur.thm - prev.thm);
      alpha_prev = alpha_t;
    }

    if (t >= cfg.min_iterations && f_history.size() > 10) {
      const double f_old = f_history[f_history.size() - 11];
      if (std::abs(f_old - f_cur) <=
          cfg.tolerance * std::max(std::abs(f_old), 1e-12))
        break;
    }
  }

  HybridLinearModel model;
  model.features = m.features;
  model.weights = best.w;
  model.theta_plus = best.thp;
  model.theta_minus = best.thm;
  model.standardization = stz;
  model.loss = spec;
  model.final_objective = f_best;
  if (diagnostics) {
    diagnostics->iterations = std::min(t, cfg.max_iterations);
    diagnostics->initial_objective = f_init;
    diagnostics->final_objective = f_cur;
    diagnostics->best_objective = f_best;
  }
  return model;
}

double objective_F(const HybridLinearModel& m, const Dataset& d, double alpha1,
                   double alpha2, const LossSpec& spec) {
  LinearPredictor pred(m, d);
  double total = 0.0;
  for (std::size_t r = 0; r < d.n; ++r) {
    const double s = pred.score(r);
    const double theta =
        d.blackbox_labels[r] == 1 ? m.theta_minus : m.theta_plus;
    const double z = static_cast<double>(d.labels[r]) * (s - theta);
    total += smoothed_phi(spec.kind, z, spec.mu);
  }
  double w1 = 0.0;
  for (double w : m.weights) w1 += std::abs(w);
  return total / static_cast<double>(d.n) + alpha1 * w1 +
         alpha2 * (m.theta_plus - m.theta_minus);
}

LinearPredictor::LinearPredictor(const HybridLinearModel& model,
                                 const Dataset& data)
    : model_(&model), data_(&data) {
  if (model.weights.size() != model.features.size())
    throw ValidationError("model weights and features disagree in length");
  feature_idx_.reserve(model.features.size());
  for (const LinearFeature& f : model.features) {
    const std::size_t idx = data.feature_index(f.feature);
    const FeatureColumn& col = data.features[idx];
    if (f.indicator && col.kind != FeatureKind::categorical)
      throw ValidationError("feature '" + f.feature +
                            "' is numeric but the model expects categories");
    if (!f.indicator && col.kind != FeatureKind::numeric)
      throw ValidationError("feature '" + f.feature +
                            "' is categorical but the model expects numbers");
    feature_idx_.push_back(idx);
  }
}

double LinearPredictor::score(std::size_t row) const {
  double s = 0.0;
  for (std::size_t j = 0; j < feature_idx_.size(); ++j) {
    const double w = model_->weights[j];
    if (w == 0.0) continue;
    const FeatureColumn& col = data_->features[feature_idx_[j]];
    const LinearFeature& f = model_->features[j];
    const double raw = f.indicator
                           ? (col.categorical[row] == f.token ? 1.0 : 0.0)
                           : col.numeric[row];
    const double v = (raw - model_->standardization.mean[j]) /
                     model_->standardization.scale[j];
    s += w * v;
  }
  return s;
}

std::pair<int, Route> LinearPredictor::predict(std::size_t row) const {
  const double s = score(row);
  if (s >= model_->theta_plus) return {1, Route::linear};
  if (s <= model_->theta_minus) return {-1, Route::linear};
  return {data_->blackbox_labels[row], Route::blackbox};
}

std::pair<int, Route> predict_linear(const HybridLinearModel& m,
                                     const Dataset& d, std::size_t row,
                                     int blackbox_label) {
  LinearPredictor pred(m, d);
  const double s = pred.score(row);
  if (s >= m.theta_plus) return {1, Route::linear};
  if (s <= m.theta_minus) return {-1, Route::linear};
  return {blackbox_label, Route::blackbox};
}

}  // namespace hpm

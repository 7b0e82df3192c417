#include "shiftiv/nuisance.hpp"

#include <cmath>
#include <memory>

#include "shiftiv/rng.hpp"
#include "shiftiv/stats.hpp"

namespace shiftiv {

namespace {

LearnerConfig to_learner_config(const NuisanceConfig& config,
                                bool interactions, std::uint64_t salt) {
  LearnerConfig lc;
  lc.learners = config.learners;
  lc.stack_split = config.stack_split;
  lc.bandwidth_scale = config.bandwidth_scale;
  lc.ols_interactions = interactions;
  lc.seed = Rng(config.seed).derive(salt).next_u64();
  return lc;
}

}  // namespace

RegressionFit fit_regression(const std::vector<RegRow>& rows, TargetKind kind,
                             const NuisanceConfig& config) {
  if (rows.empty()) {
    throw Error(ErrKind::TooFewRows, ErrClass::Estimation, "no training rows");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows[0].x.size());
  Eigen::MatrixXd features(m, 1 + d);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const RegRow& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.x.size()) != d ||
        !is_finite(r.z) || !is_finite(r.t)) {
      throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                  "non-finite or ragged training row");
    }
    features(i, 0) = r.z;
    for (Eigen::Index j = 0; j < d; ++j) {
      features(i, 1 + j) = r.x[static_cast<std::size_t>(j)];
    }
    target[i] = r.t;
  }
  auto stack = std::make_shared<StackFit>(
      fit_stack(features, target, to_learner_config(config, true, 0x7265)));
  RegressionFit fit;
  fit.target_kind = kind;
  fit.learner_descriptor = stack->descriptor;
  fit.stack_weights = stack->weights;
  fit.raw = [stack, d](double z, const std::vector<double>& x) {
    Eigen::VectorXd f(1 + d);
    f[0] = z;
    for (Eigen::Index j = 0; j < d; ++j) {
      f[1 + j] = x[static_cast<std::size_t>(j)];
    }
    return stack->predict(f);
  };
  return fit;
}

DensityFit fit_density(const std::vector<DenRow>& rows,
                       const NuisanceConfig& config) {
  if (rows.size() < 10) {
    throw Error(ErrKind::TooFewRows, ErrClass::Estimation,
                std::to_string(rows.size()) + " rows; need at least 10");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows[0].x.size());
  Eigen::MatrixXd features(m, d);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const DenRow& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.x.size()) != d || !is_finite(r.z)) {
      throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                  "non-finite or ragged training row");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      features(i, j) = r.x[static_cast<std::size_t>(j)];
    }
    target[i] = r.z;
  }
  auto stack = std::make_shared<StackFit>(
      fit_stack(features, target, to_learner_config(config, false, 0x6465)));

  auto mean_eval = [stack, d](const std::vector<double>& x) {
    Eigen::VectorXd f(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      f[j] = x[static_cast<std::size_t>(j)];
    }
    return stack->predict(f);
  };

  double ss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = target[i] - mean_eval(rows[static_cast<std::size_t>(i)].x);
    ss += r * r;
  }
  const double var = ss / static_cast<double>(m);
  if (var <= 1e-12) {
    throw Error(ErrKind::ZeroResidualVariance, ErrClass::Estimation,
                "residual variance " + std::to_string(var));
  }
  DensityFit fit;
  fit.mean_evaluator = mean_eval;
  fit.sigma = std::sqrt(var);
  const double sigma = fit.sigma;
  fit.evaluator = [mean_eval, sigma](double z, const std::vector<double>& x) {
    return normal_pdf((z - mean_eval(x)) / sigma) / sigma;
  };
  return fit;
}

NuisanceModel fit_nuisance(const Dataset& data,
                           const std::vector<std::size_t>& train_indices,
                           const NuisanceConfig& config) {
  if (train_indices.empty()) {
    throw Error(ErrKind::TooFewRows, ErrClass::Estimation,
                "empty training index set");
  }
  std::vector<RegRow> mu_rows, lam_rows;
  std::vector<DenRow> den_rows;
  mu_rows.reserve(train_indices.size());
  lam_rows.reserve(train_indices.size());
  den_rows.reserve(train_indices.size());
  bool y_binary = true;
  for (std::size_t idx : train_indices) {
    if (idx >= data.n()) {
      throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                  "training index " + std::to_string(idx) + " out of range");
    }
    const Observation& o = data.observations[idx];
    if (o.y != 0.0 && o.y != 1.0) y_binary = false;
    mu_rows.push_back({o.z, o.x, o.y});
    lam_rows.push_back({o.z, o.x, o.a});
    den_rows.push_back({o.z, o.x});
  }
  NuisanceConfig mu_cfg = config, lam_cfg = config, pi_cfg = config;
  mu_cfg.seed = Rng(config.seed).derive(1).next_u64();
  lam_cfg.seed = Rng(config.seed).derive(2).next_u64();
  pi_cfg.seed = Rng(config.seed).derive(3).next_u64();

  NuisanceModel model;
  model.mu = fit_regression(
      mu_rows, y_binary ? TargetKind::Binary : TargetKind::Continuous, mu_cfg);
  model.lambda = fit_regression(lam_rows, TargetKind::Binary, lam_cfg);
  model.pi = fit_density(den_rows, pi_cfg);
  return model;
}

RatioResult density_ratio(const NuisanceModel& model, double z, double shift,
                          const std::vector<double>& x, const ClipSpec& clip) {
  if (!(clip.eps > 0.0 && clip.eps < clip.cmax)) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "clip bounds require 0 < eps < cmax");
  }
  if (shift == 0.0) return {1.0, false};
  const double den = model.pi.evaluator(z, x);
  if (den == 0.0) return {clip.cmax, true};
  const double num = model.pi.evaluator(z + shift, x);
  const double r = num / den;
  if (r < clip.eps) return {clip.eps, true};
  if (r > clip.cmax) return {clip.cmax, true};
  return {r, false};
}

}  // namespace shiftiv

#include "shiftiv/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftiv/common.hpp"
#include "shiftiv/rng.hpp"

namespace shiftiv {

const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::Mean: return "mean";
    case LearnerKind::Ols: return "ols";
    case LearnerKind::Nw: return "nw";
  }
  return "unknown";
}

namespace {

class MeanLearner final : public FittedLearner {
 public:
  explicit MeanLearner(double value) : value_(value) {}
  double predict(const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return value_;
  }
  std::string name() const override { return "mean"; }

 private:
  double value_;
};

Eigen::VectorXd ols_design_row(const Eigen::Ref<const Eigen::VectorXd>& f,
                               bool interactions) {
  const Eigen::Index p = f.size();
  const Eigen::Index cols = interactions && p > 1 ? 2 * p : p + 1;
  Eigen::VectorXd row(cols);
  row[0] = 1.0;
  row.segment(1, p) = f;
  if (interactions && p > 1) {
    for (Eigen::Index j = 1; j < p; ++j) row[p + j] = f[0] * f[j];
  }
  return row;
}

class OlsLearner final : public FittedLearner {
 public:
  OlsLearner(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
             bool interactions)
      : interactions_(interactions) {
    const Eigen::Index m = features.rows();
    Eigen::MatrixXd design(m, ols_design_row(features.row(0), interactions).size());
    for (Eigen::Index i = 0; i < m; ++i) {
      design.row(i) = ols_design_row(features.row(i), interactions);
    }
    coef_ = design.colPivHouseholderQr().solve(target);
  }

  double predict(const Eigen::Ref<const Eigen::VectorXd>& f) const override {
    return ols_design_row(f, interactions_).dot(coef_);
  }
  std::string name() const override { return "ols"; }

 private:
  bool interactions_;
  Eigen::VectorXd coef_;
};

// Gaussian-product-kernel local averaging with rule-of-thumb bandwidths.
// Weights are formed in log space with max subtraction, so a query far from
// every training point degrades to a nearest-support average instead of 0/0.
class NwLearner final : public FittedLearner {
 public:
  NwLearner(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
            double bandwidth_scale)
      : features_(features), target_(target) {
    const double m = static_cast<double>(features.rows());
    inv_h_.resize(features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const double sd = std::sqrt(
          (features.col(j).array() - features.col(j).mean()).square().sum() /
          std::max(m - 1.0, 1.0));
      const double h = 1.06 * sd * std::pow(m, -0.2) * bandwidth_scale;
      inv_h_[j] = h > 0.0 ? 1.0 / h : 0.0;  // constant feature: no distance
    }
  }

  double predict(const Eigen::Ref<const Eigen::VectorXd>& f) const override {
    const Eigen::Index m = features_.rows();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(static_cast<std::size_t>(m));  // call-local: fitted model stays shareable
    for (Eigen::Index i = 0; i < m; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < features_.cols(); ++j) {
        const double u = (f[j] - features_(i, j)) * inv_h_[j];
        s -= 0.5 * u * u;
      }
      logw[static_cast<std::size_t>(i)] = s;
      if (s > best) best = s;
    }
    double wsum = 0.0, tsum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double w = std::exp(logw[static_cast<std::size_t>(i)] - best);
      wsum += w;
      tsum += w * target_[i];
    }
    return tsum / wsum;
  }
  std::string name() const override { return "nw"; }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd target_;
  Eigen::VectorXd inv_h_;
};

std::unique_ptr<FittedLearner> fit_one(LearnerKind kind,
                                       const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& target,
                                       const LearnerConfig& config) {
  switch (kind) {
    case LearnerKind::Mean:
      return std::make_unique<MeanLearner>(target.mean());
    case LearnerKind::Ols:
      return std::make_unique<OlsLearner>(features, target,
                                          config.ols_interactions);
    case LearnerKind::Nw:
      return std::make_unique<NwLearner>(features, target,
                                         config.bandwidth_scale);
  }
  throw Error(ErrKind::BadArgument, ErrClass::Config, "unknown learner kind");
}

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", w);
  return buf;
}

}  // namespace

Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double csum = 0.0, tau = 0.0;
  int rho = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    csum += u[static_cast<std::size_t>(j)];
    const double t = (1.0 - csum) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] + t > 0.0) {
      rho = static_cast<int>(j + 1);
      tau = t;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(v[i] + tau, 0.0);
  return v;
}

StackFit fit_stack(const Eigen::MatrixXd& features,
                   const Eigen::VectorXd& target,
                   const LearnerConfig& config) {
  const Eigen::Index m = features.rows();
  const std::size_t n_learners = config.learners.size();
  if (n_learners == 0) {
    throw Error(ErrKind::BadConfig, ErrClass::Config, "empty learner list");
  }
  if (static_cast<std::size_t>(m) < 2 * n_learners) {
    throw Error(ErrKind::TooFewRows, ErrClass::Estimation,
                std::to_string(m) + " rows; need at least " +
                    std::to_string(2 * n_learners));
  }

  // Seeded split: fit on the first part, weight on the held-out part.
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = Rng(config.seed).derive(0x737461636b);  // stacking stream
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const Eigen::Index n_train = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(config.stack_split *
                                             static_cast<double>(m))),
      1, m - 1);
  const Eigen::Index n_hold = m - n_train;
  const Eigen::Index p = features.cols();
  Eigen::MatrixXd train_f(n_train, p), hold_f(n_hold, p);
  Eigen::VectorXd train_t(n_train), hold_t(n_hold);
  for (Eigen::Index i = 0; i < n_train; ++i) {
    train_f.row(i) = features.row(perm[static_cast<std::size_t>(i)]);
    train_t[i] = target[perm[static_cast<std::size_t>(i)]];
  }
  for (Eigen::Index i = 0; i < n_hold; ++i) {
    hold_f.row(i) = features.row(perm[static_cast<std::size_t>(n_train + i)]);
    hold_t[i] = target[perm[static_cast<std::size_t>(n_train + i)]];
  }

  Eigen::MatrixXd hold_pred(n_hold, static_cast<Eigen::Index>(n_learners));
  {
    std::vector<std::unique_ptr<FittedLearner>> split_fits;
    split_fits.reserve(n_learners);
    for (LearnerKind kind : config.learners) {
      split_fits.push_back(fit_one(kind, train_f, train_t, config));
    }
    for (Eigen::Index i = 0; i < n_hold; ++i) {
      for (std::size_t l = 0; l < n_learners; ++l) {
        hold_pred(i, static_cast<Eigen::Index>(l)) =
            split_fits[l]->predict(hold_f.row(i));
      }
    }
  }

  // Start at the best single learner: an exact fit is a fixed point of the
  // projected gradient, so representable targets keep weight exactly 1.
  Eigen::Index best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < n_learners; ++l) {
    const double sse =
        (hold_pred.col(static_cast<Eigen::Index>(l)) - hold_t).squaredNorm();
    if (sse < best_sse) {
      best_sse = sse;
      best = static_cast<Eigen::Index>(l);
    }
  }
  Eigen::VectorXd w =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_learners));
  w[best] = 1.0;

  const Eigen::MatrixXd gram = hold_pred.transpose() * hold_pred;
  const double lipschitz =
      2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram)
                .eigenvalues()
                .maxCoeff();
  if (lipschitz > 0.0) {
    const double step = 1.0 / lipschitz;
    const Eigen::VectorXd hty = hold_pred.transpose() * hold_t;
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXd grad = 2.0 * (gram * w - hty);
      w = project_simplex(w - step * grad);
    }
  }

  StackFit fit;
  fit.weights = w;
  fit.learners.reserve(n_learners);
  for (LearnerKind kind : config.learners) {
    fit.learners.push_back(fit_one(kind, features, target, config));
  }
  std::string desc = "stack(";
  for (std::size_t l = 0; l < n_learners; ++l) {
    if (l) desc += ",";
    desc += learner_name(config.learners[l]);
    desc += ":";
    desc += format_weight(w[static_cast<Eigen::Index>(l)]);
  }
  desc += ")";
  fit.descriptor = std::move(desc);
  return fit;
}

}  // namespace shiftiv

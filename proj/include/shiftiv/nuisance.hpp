#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shiftiv/common.hpp"
#include "shiftiv/dataset.hpp"
#include "shiftiv/learners.hpp"

namespace shiftiv {

enum class TargetKind { Continuous, Binary };

struct NuisanceConfig {
  std::vector<LearnerKind> learners = {LearnerKind::Mean, LearnerKind::Ols,
                                       LearnerKind::Nw};
  double stack_split = 0.8;
  double bandwidth_scale = 1.0;
  std::uint64_t seed = 1;
};

// Fitted regression m(z, x). Binary-target predictions are clipped to [0,1]
// at evaluation, so the published invariant holds for every query point.
struct RegressionFit {
  using Eval = std::function<double(double, const std::vector<double>&)>;
  Eval raw;
  TargetKind target_kind = TargetKind::Continuous;
  std::string learner_descriptor;
  Eigen::VectorXd stack_weights;  // empty when the fit is not a stack

  double operator()(double z, const std::vector<double>& x) const {
    const double p = raw(z, x);
    return target_kind == TargetKind::Binary ? clamp(p, 0.0, 1.0) : p;
  }
};

// Fitted conditional density of the instrument given covariates:
// a Gaussian around a fitted mean with one global residual scale.
struct DensityFit {
  std::function<double(const std::vector<double>&)> mean_evaluator;
  double sigma = 1.0;
  std::function<double(double, const std::vector<double>&)> evaluator;
};

struct NuisanceModel {
  RegressionFit mu;      // outcome regression E[Y | Z, X]
  RegressionFit lambda;  // treatment regression E[A | Z, X]
  DensityFit pi;         // conditional instrument density
};

struct RegRow {
  double z;
  std::vector<double> x;
  double t;
};

struct DenRow {
  double z;
  std::vector<double> x;
};

struct ClipSpec {
  double eps = 1e-3;
  double cmax = 1e3;
};

struct RatioResult {
  double value = 1.0;
  bool clipped = false;
};

RegressionFit fit_regression(const std::vector<RegRow>& rows, TargetKind kind,
                             const NuisanceConfig& config);

DensityFit fit_density(const std::vector<DenRow>& rows,
                       const NuisanceConfig& config);

NuisanceModel fit_nuisance(const Dataset& data,
                           const std::vector<std::size_t>& train_indices,
                           const NuisanceConfig& config);

// pi(z + shift | x) / pi(z | x), clipped into [eps, cmax]. A zero denominator
// maps to cmax with the clip flag set; shift == 0 is exactly 1, never clipped.
RatioResult density_ratio(const NuisanceModel& model, double z, double shift,
                          const std::vector<double>& x, const ClipSpec& clip);

}  // namespace shiftiv

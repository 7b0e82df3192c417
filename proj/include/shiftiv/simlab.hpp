#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shiftiv/dataset.hpp"
#include "shiftiv/estimator.hpp"
#include "shiftiv/nuisance.hpp"

namespace shiftiv {

// Homogeneous-effect synthetic design: covariates and the latent outcome are
// jointly standard normal, the instrument is a noisy linear score of the
// covariates, treatment is taken when the instrument clears the latent
// outcome, and treatment adds a constant effect.
struct KennedyDgp {
  std::vector<double> alpha{1.0, 1.0, -1.0, -1.0};
  double psi_true = 2.0;
  double z_noise_variance = 2.0;
  std::uint64_t seed = 1;
};

// Closed-form nuisances for the design above. The treatment probability and
// outcome regression depend on the instrument alone; the instrument density
// is normal around the covariate score.
NuisanceModel kennedy_oracle(const KennedyDgp& dgp);

struct KennedySample {
  Dataset data;
  NuisanceModel oracle;
};

KennedySample gen_kennedy(const KennedyDgp& dgp, std::size_t n);

// Degrades exact nuisances at rate n^{-1/k}. Regressions get an affine error
// (c + z) * n^{-1/k} with c drawn once per call, so the error survives the
// up-down contrast instead of cancelling. The density keeps its normal shape
// but its location picks up (1 + N(0,1)) * n^{-1/k} noise and its variance
// shrinks deterministically by the factor 1/(1 + n^{-1/k}); values are
// floored at 1e-6. Perturbed regressions are continuous-valued fits even
// when the base was a probability, so the injected error is never clipped
// away. k <= 0 or non-finite k means no perturbation.
NuisanceModel perturb(const NuisanceModel& oracle, std::size_t n, double k,
                      std::uint64_t seed);

struct RateStudyConfig {
  std::vector<std::size_t> ns{100, 1000, 5000, 10000};
  std::vector<double> ks{2.0, 3.0, 4.0, 6.0};
  std::vector<double> deltas{0.5, 1.0, 2.0, 3.0, 4.0};
  int reps = 500;
  std::uint64_t seed = 1;
  KennedyDgp dgp;
  double weak_threshold = 1e-3;
  ClipSpec clip;
  int plugin_bootstrap_b = 500;
  int threads = 1;
};

struct StudyRow {
  std::size_t n = 0;
  double k = 0.0;
  double delta = 0.0;
  std::string estimator;
  int reps_used = 0;
  int excluded = 0;
  double mean_bias = 0.0;
  double emp_sd = 0.0;
  double mean_se = 0.0;
};

struct StudyTable {
  std::vector<StudyRow> rows;
};

// One fresh sample and one fresh perturbation per (n, k, delta, rep) cell,
// each on its own derived stream, so the table is invariant to thread count
// and to which cells run. Plug-in and influence-function rows are emitted
// per cell; replications where an estimator degenerates are excluded from
// that estimator's aggregates and counted.
StudyTable rate_study(const RateStudyConfig& config);

struct PositivitySample {
  std::vector<int> x;
  std::vector<double> z;
};

// Conditional instrument support: group 0 lives on [-3, 1], group 1 on
// [-1, 3]; the marginal support is their union [-3, 3].
std::pair<double, double> positivity_support(int x);

// Binary group, then a truncated normal (location 2x-1, scale 0.5) drawn by
// inverse CDF on the group's support interval.
PositivitySample gen_positivity(std::size_t n, std::uint64_t seed);

struct ViolationCounts {
  std::size_t usual = 0;
  std::size_t shift = 0;
};

// usual counts draws whose conditional support misses part of the marginal
// support (every draw here, by construction). shift counts draws where
// moving the instrument by +-delta exits the draw's own support.
ViolationCounts count_violations(const PositivitySample& sample, double delta);

struct CoverageConfig {
  std::size_t n = 2000;
  int reps = 500;
  std::vector<double> delta_grid{0.5, 1.0, 2.0, 3.0, 4.0};
  double level = 0.95;
  std::uint64_t seed = 1;
  int bootstrap_b = 1000;
  KennedyDgp dgp;
  double weak_threshold = 1e-3;
  ClipSpec clip;
  int threads = 1;
};

struct CoverageTable {
  std::vector<double> deltas;
  std::vector<double> pointwise;  // per-delta CI coverage of the true effect
  double uniform = 0.0;           // band covers the constant truth everywhere
  double homogeneity_reject_rate = 0.0;
  int reps_used = 0;
  int excluded = 0;
};

// Exact nuisances, influence-function estimator, per-replication pointwise
// intervals and multiplier-bootstrap band, aggregated over replications.
CoverageTable coverage_study(const CoverageConfig& config);

}  // namespace shiftiv

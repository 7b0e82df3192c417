#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shiftiv/estimator.hpp"

namespace shiftiv {

struct PointwiseCi {
  double lo = 0.0;
  double hi = 0.0;
  double se = 0.0;
};

// se = sd(influence)/sqrt(n), interval = psi_hat +- q * se with the standard
// normal quantile. A constant column gives a zero-width interval.
PointwiseCi pointwise_ci(double psi_hat, const std::vector<double>& influence,
                         double level);

struct UniformBand {
  std::vector<double> deltas;
  std::vector<double> psi;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> sigmas;  // per-column influence sd
  double critical_value = 0.0;
  double level = 0.95;
  int b = 0;
  std::uint64_t seed = 0;
};

// Studentized sup statistic over the shift grid, resampled with Gaussian
// multipliers. One multiplier vector is drawn per bootstrap draw and reused
// across every column, preserving the cross-shift correlation. Draw j uses a
// stream derived from (seed, j), so the result does not depend on thread
// count or execution order. The critical value is floored at the pointwise
// normal quantile so the uniform band always contains the pointwise one.
UniformBand multiplier_bootstrap(const InfluenceMatrix& influence,
                                 const std::vector<double>& psi_hats, int b,
                                 std::uint64_t seed, double level,
                                 int threads = 1);

struct HomogeneityResult {
  bool reject = false;
  std::optional<std::pair<double, double>> feasible_constant_range;
};

// A single constant fits the band iff max(lo) <= min(hi).
HomogeneityResult homogeneity_test(const UniformBand& band);

}  // namespace shiftiv

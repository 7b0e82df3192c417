#include "shiftiv/inference.hpp"

#include <algorithm>
#include <cmath>

#include "shiftiv/parallel.hpp"
#include "shiftiv/rng.hpp"
#include "shiftiv/stats.hpp"

namespace shiftiv {

PointwiseCi pointwise_ci(double psi_hat, const std::vector<double>& influence,
                         double level) {
  if (influence.size() < 2) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "pointwise interval needs at least two influence values");
  }
  PointwiseCi ci;
  ci.se = sdev(influence) / std::sqrt(static_cast<double>(influence.size()));
  const double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
  ci.lo = psi_hat - q * ci.se;
  ci.hi = psi_hat + q * ci.se;
  return ci;
}

UniformBand multiplier_bootstrap(const InfluenceMatrix& influence,
                                 const std::vector<double>& psi_hats, int b,
                                 std::uint64_t seed, double level,
                                 int threads) {
  const std::size_t n = influence.n;
  const std::size_t n_deltas = influence.deltas.size();
  if (n_deltas == 0 || psi_hats.size() != n_deltas) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "influence matrix and point estimates disagree on grid size");
  }
  if (n < 2) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "uniform band needs at least two rows");
  }
  if (b < 100) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "bootstrap draw count must be at least 100");
  }

  std::vector<double> sigmas(n_deltas);
  for (std::size_t g = 0; g < n_deltas; ++g) {
    const std::vector<double> col = influence.column(g);
    sigmas[g] = sdev(col);
    // a numerically constant column leaves sdev at rounding noise, not 0,
    // so the guard is relative to the column's own magnitude
    const double floor = std::abs(mean(col)) * 1e-12;
    if (!(sigmas[g] > floor)) {
      throw Error(ErrKind::ZeroVarianceColumn, ErrClass::Estimation,
                  "influence column " + std::to_string(g) +
                      " has zero variance");
    }
  }

  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> sups(static_cast<std::size_t>(b), 0.0);
  parallel_for(sups.size(), threads, [&](std::size_t j) {
    Rng rng = Rng(seed).derive(0x626f6f74, j);
    std::vector<double> acc(n_deltas, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = rng.normal();
      const double* row = influence.values.data() + i * n_deltas;
      for (std::size_t g = 0; g < n_deltas; ++g) acc[g] += m * row[g];
    }
    double sup = 0.0;
    for (std::size_t g = 0; g < n_deltas; ++g) {
      sup = std::max(sup, std::abs(acc[g]) / (root_n * sigmas[g]));
    }
    sups[j] = sup;
  });

  std::sort(sups.begin(), sups.end());
  const std::size_t rank = static_cast<std::size_t>(clamp(
      std::ceil(level * static_cast<double>(b)), 1.0, static_cast<double>(b)));
  const double pointwise_q = normal_quantile(1.0 - (1.0 - level) / 2.0);
  // Floor at the pointwise quantile: the sup of standardized columns
  // stochastically dominates any single column, so a smaller order statistic
  // is bootstrap noise and would break band nesting.
  const double critical = std::max(sups[rank - 1], pointwise_q);

  UniformBand band;
  band.deltas = influence.deltas;
  band.psi = psi_hats;
  band.sigmas = sigmas;
  band.critical_value = critical;
  band.level = level;
  band.b = b;
  band.seed = seed;
  band.lo.resize(n_deltas);
  band.hi.resize(n_deltas);
  for (std::size_t g = 0; g < n_deltas; ++g) {
    const double half = critical * sigmas[g] / root_n;
    band.lo[g] = psi_hats[g] - half;
    band.hi[g] = psi_hats[g] + half;
  }
  return band;
}

HomogeneityResult homogeneity_test(const UniformBand& band) {
  HomogeneityResult res;
  if (band.lo.empty()) {
    res.reject = false;
    return res;
  }
  const double max_lo = *std::max_element(band.lo.begin(), band.lo.end());
  const double min_hi = *std::min_element(band.hi.begin(), band.hi.end());
  if (max_lo <= min_hi) {
    res.reject = false;
    res.feasible_constant_range = std::make_pair(max_lo, min_hi);
  } else {
    res.reject = true;
  }
  return res;
}

}  // namespace shiftiv

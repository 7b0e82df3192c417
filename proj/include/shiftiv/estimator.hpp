#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftiv/dataset.hpp"
#include "shiftiv/nuisance.hpp"

namespace shiftiv {

// Shift magnitude plus optional instrument support bounds. With bounds set,
// a row's shift is zeroed in any direction that would leave the support.
struct ShiftSpec {
  double delta = 1.0;
  std::optional<std::pair<double, double>> support;  // (z_min, z_max)
};

struct EffectiveShifts {
  double up = 0.0;
  double down = 0.0;
};

EffectiveShifts effective_shifts(double z, const ShiftSpec& spec);

enum class Which { Y, A };

enum class EstimatorKind { Plugin, Ipw, If, Tsls };

const char* estimator_kind_name(EstimatorKind k);

struct XiRow {
  double xi_y_up = 0.0;
  double xi_y_down = 0.0;
  double xi_a_up = 0.0;
  double xi_a_down = 0.0;
};

struct EstimateRecord {
  double delta = 0.0;
  double psi_hat = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double complier_fraction = 0.0;
  bool complier_flag = false;  // set when complier_fraction > 1.05
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool has_uniform = false;
  double unif_lo = 0.0;
  double unif_hi = 0.0;
  long n_clipped = 0;
  EstimatorKind kind = EstimatorKind::If;
};

// Per-observation influence values, one column per shift magnitude.
// Column means are 0 up to rounding: the ratio estimator solves the
// empirical estimating equation exactly.
struct InfluenceMatrix {
  std::vector<double> values;  // row-major, n x G
  std::vector<double> deltas;
  std::size_t n = 0;

  double at(std::size_t i, std::size_t g) const {
    return values[i * deltas.size() + g];
  }
  std::vector<double> column(std::size_t g) const {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = at(i, g);
    return col;
  }
};

// One-sided influence building block:
//   xi(t; shift) = ratio * (t - m(z, x)) + m(z + shift, x)
// where ratio = pi(z - shift | x) / pi(z | x) and m is the regression chosen
// by `which`. shift == 0 returns t exactly. Binary-target regressions are
// evaluated with an interior clip so later ratios never see exact 0 or 1;
// the clip is applied identically at z and z + shift.
double xi(double t, double z, const std::vector<double>& x, double shift,
          const NuisanceModel& model, Which which, const ClipSpec& clip,
          long* clip_events = nullptr);

XiRow compute_xi_row(const Observation& o, const NuisanceModel& model,
                     const ShiftSpec& spec, const ClipSpec& clip,
                     long* clip_events = nullptr);

struct IfEstimate {
  EstimateRecord record;
  std::vector<double> influence;
};

struct EstimatorOptions {
  double level = 0.95;
  double weak_threshold = 1e-3;
  int bootstrap_b = 500;         // plug-in / weighting bootstrap draws
  std::uint64_t bootstrap_seed = 1;
};

// models[f] serves rows with fold id f; pass a single model with
// FoldAssignment::single(n) to evaluate without cross-fitting.
IfEstimate estimate_if(const Dataset& data,
                       const std::vector<NuisanceModel>& models,
                       const FoldAssignment& folds, const ShiftSpec& spec,
                       const ClipSpec& clip, const EstimatorOptions& opt = {});

EstimateRecord estimate_plugin(const Dataset& data,
                               const std::vector<NuisanceModel>& models,
                               const FoldAssignment& folds,
                               const ShiftSpec& spec,
                               const EstimatorOptions& opt = {});

EstimateRecord estimate_ipw(const Dataset& data,
                            const std::vector<NuisanceModel>& models,
                            const FoldAssignment& folds, const ShiftSpec& spec,
                            const ClipSpec& clip,
                            const EstimatorOptions& opt = {});

EstimateRecord estimate_tsls(const Dataset& data, double level = 0.95);

struct CrossFitConfig {
  int k = 5;
  std::uint64_t seed = 1;
  NuisanceConfig nuisance;
  std::vector<double> delta_grid;
  std::optional<std::pair<double, double>> support;
  ClipSpec clip;
  EstimatorOptions options;
  int threads = 1;
};

struct FoldModelInfo {
  std::string mu_descriptor;
  std::string lambda_descriptor;
  double pi_sigma = 0.0;
};

struct CrossFitResult {
  std::vector<EstimateRecord> plugin_records;
  std::vector<EstimateRecord> ipw_records;
  std::vector<EstimateRecord> if_records;
  std::vector<EstimateRecord> tsls_records;
  InfluenceMatrix influence;
  std::vector<FoldModelInfo> folds_info;
};

CrossFitResult cross_fit_run(const Dataset& data, const CrossFitConfig& config);

}  // namespace shiftiv

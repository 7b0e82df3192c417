#include "shiftiv/estimator.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "shiftiv/parallel.hpp"
#include "shiftiv/rng.hpp"
#include "shiftiv/stats.hpp"

namespace shiftiv {

namespace {

constexpr double kInteriorEps = 1e-4;

// Binary-target predictions are kept strictly inside (0,1) wherever they can
// reach a denominator; the same transform is applied at every query point so
// the shift-free identities still cancel exactly.
double eval_reg(const RegressionFit& reg, double z,
                const std::vector<double>& x) {
  const double p = reg(z, x);
  if (reg.target_kind == TargetKind::Binary) {
    return clamp(p, kInteriorEps, 1.0 - kInteriorEps);
  }
  return p;
}

const RegressionFit& pick(const NuisanceModel& model, Which which) {
  return which == Which::Y ? model.mu : model.lambda;
}

void check_fold_setup(const Dataset& data,
                      const std::vector<NuisanceModel>& models,
                      const FoldAssignment& folds) {
  if (folds.fold_of.size() != data.n()) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "fold assignment size differs from dataset size");
  }
  if (models.size() != static_cast<std::size_t>(folds.k)) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "model count differs from fold count");
  }
}

double bootstrap_ratio_se(const std::vector<double>& num_terms,
                          const std::vector<double>& den_terms, int b,
                          std::uint64_t seed) {
  const std::size_t n = num_terms.size();
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) {
    Rng rng = Rng(seed).derive(0x7273616d706c65, static_cast<std::uint64_t>(j));
    double ns = 0.0, ds = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t idx = rng.below(n);
      ns += num_terms[idx];
      ds += den_terms[idx];
    }
    if (ds != 0.0) draws.push_back(ns / ds);
  }
  return draws.size() >= 2 ? sdev(draws) : 0.0;
}

void fill_ci(EstimateRecord& rec, double level) {
  const double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
  rec.ci_lo = rec.psi_hat - q * rec.se;
  rec.ci_hi = rec.psi_hat + q * rec.se;
}

}  // namespace

const char* estimator_kind_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Plugin: return "plugin";
    case EstimatorKind::Ipw: return "ipw";
    case EstimatorKind::If: return "if";
    case EstimatorKind::Tsls: return "tsls";
  }
  return "unknown";
}

EffectiveShifts effective_shifts(double z, const ShiftSpec& spec) {
  if (!spec.support) return {spec.delta, spec.delta};
  const auto [z_min, z_max] = *spec.support;
  EffectiveShifts s;
  s.up = z <= z_max - spec.delta ? spec.delta : 0.0;
  s.down = z >= z_min + spec.delta ? spec.delta : 0.0;
  return s;
}

double xi(double t, double z, const std::vector<double>& x, double shift,
          const NuisanceModel& model, Which which, const ClipSpec& clip,
          long* clip_events) {
  if (shift == 0.0) return t;
  const RatioResult ratio = density_ratio(model, z, -shift, x, clip);
  if (ratio.clipped && clip_events) ++*clip_events;
  const RegressionFit& reg = pick(model, which);
  const double m0 = eval_reg(reg, z, x);
  const double m1 = eval_reg(reg, z + shift, x);
  return ratio.value * (t - m0) + m1;
}

XiRow compute_xi_row(const Observation& o, const NuisanceModel& model,
                     const ShiftSpec& spec, const ClipSpec& clip,
                     long* clip_events) {
  const EffectiveShifts s = effective_shifts(o.z, spec);
  XiRow row;
  row.xi_y_up = xi(o.y, o.z, o.x, s.up, model, Which::Y, clip, clip_events);
  row.xi_y_down = xi(o.y, o.z, o.x, -s.down, model, Which::Y, clip, clip_events);
  row.xi_a_up = xi(o.a, o.z, o.x, s.up, model, Which::A, clip, clip_events);
  row.xi_a_down = xi(o.a, o.z, o.x, -s.down, model, Which::A, clip, clip_events);
  return row;
}

IfEstimate estimate_if(const Dataset& data,
                       const std::vector<NuisanceModel>& models,
                       const FoldAssignment& folds, const ShiftSpec& spec,
                       const ClipSpec& clip, const EstimatorOptions& opt) {
  check_fold_setup(data, models, folds);
  const std::size_t n = data.n();
  std::vector<double> xy(n), xa(n);
  long clip_events = 0;
  bool any_shift = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = data.observations[i];
    const NuisanceModel& model = models[static_cast<std::size_t>(folds.fold_of[i])];
    const EffectiveShifts s = effective_shifts(o.z, spec);
    if (s.up != 0.0 || s.down != 0.0) any_shift = true;
    // The up and down terms share the same regression anchor m(z, x) and the
    // two density ratios; shift 0 collapses a term to the raw observation.
    double ru = 1.0, rd = 1.0;
    if (s.up != 0.0) {
      const RatioResult r = density_ratio(model, o.z, -s.up, o.x, clip);
      if (r.clipped) ++clip_events;
      ru = r.value;
    }
    if (s.down != 0.0) {
      const RatioResult r = density_ratio(model, o.z, s.down, o.x, clip);
      if (r.clipped) ++clip_events;
      rd = r.value;
    }
    double xi_y_up = o.y, xi_y_down = o.y, xi_a_up = o.a, xi_a_down = o.a;
    if (s.up != 0.0 || s.down != 0.0) {
      const double mu0 = eval_reg(model.mu, o.z, o.x);
      const double la0 = eval_reg(model.lambda, o.z, o.x);
      if (s.up != 0.0) {
        xi_y_up = ru * (o.y - mu0) + eval_reg(model.mu, o.z + s.up, o.x);
        xi_a_up = ru * (o.a - la0) + eval_reg(model.lambda, o.z + s.up, o.x);
      }
      if (s.down != 0.0) {
        xi_y_down = rd * (o.y - mu0) + eval_reg(model.mu, o.z - s.down, o.x);
        xi_a_down = rd * (o.a - la0) + eval_reg(model.lambda, o.z - s.down, o.x);
      }
    }
    xy[i] = xi_y_up - xi_y_down;
    xa[i] = xi_a_up - xi_a_down;
  }
  if (!any_shift) {
    throw Error(ErrKind::DegenerateIntervention, ErrClass::Estimation,
                "every effective shift is zero; the contrast vanishes");
  }
  const double num = mean(xy);
  const double den = mean(xa);
  if (std::abs(den) < opt.weak_threshold) {
    throw Error(ErrKind::WeakInstrument, ErrClass::Estimation,
                "|denominator| = " + std::to_string(std::abs(den)) +
                    " below threshold " + std::to_string(opt.weak_threshold));
  }
  IfEstimate out;
  out.record.kind = EstimatorKind::If;
  out.record.delta = spec.delta;
  out.record.numerator = num;
  out.record.denominator = den;
  out.record.psi_hat = num / den;
  out.record.complier_fraction = std::abs(den);
  out.record.complier_flag = out.record.complier_fraction > 1.05;
  out.record.n_clipped = clip_events;
  out.influence.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.influence[i] = (xy[i] - out.record.psi_hat * xa[i]) / den;
  }
  out.record.se = sdev(out.influence) / std::sqrt(static_cast<double>(n));
  fill_ci(out.record, opt.level);
  return out;
}

EstimateRecord estimate_plugin(const Dataset& data,
                               const std::vector<NuisanceModel>& models,
                               const FoldAssignment& folds,
                               const ShiftSpec& spec,
                               const EstimatorOptions& opt) {
  check_fold_setup(data, models, folds);
  const std::size_t n = data.n();
  std::vector<double> dy(n), da(n);
  bool any_shift = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = data.observations[i];
    const NuisanceModel& model = models[static_cast<std::size_t>(folds.fold_of[i])];
    const EffectiveShifts s = effective_shifts(o.z, spec);
    if (s.up == 0.0 && s.down == 0.0) {
      // fully blocked row: the contrast is identically zero, skip the model
      dy[i] = 0.0;
      da[i] = 0.0;
      continue;
    }
    any_shift = true;
    dy[i] = eval_reg(model.mu, o.z + s.up, o.x) -
            eval_reg(model.mu, o.z - s.down, o.x);
    da[i] = eval_reg(model.lambda, o.z + s.up, o.x) -
            eval_reg(model.lambda, o.z - s.down, o.x);
  }
  if (!any_shift) {
    throw Error(ErrKind::DegenerateIntervention, ErrClass::Estimation,
                "every effective shift is zero; the contrast vanishes");
  }
  const double num = mean(dy);
  const double den = mean(da);
  if (std::abs(den) < opt.weak_threshold) {
    throw Error(ErrKind::WeakInstrument, ErrClass::Estimation,
                "|denominator| = " + std::to_string(std::abs(den)) +
                    " below threshold " + std::to_string(opt.weak_threshold));
  }
  EstimateRecord rec;
  rec.kind = EstimatorKind::Plugin;
  rec.delta = spec.delta;
  rec.numerator = num;
  rec.denominator = den;
  rec.psi_hat = num / den;
  rec.complier_fraction = std::abs(den);
  rec.complier_flag = rec.complier_fraction > 1.05;
  rec.se = bootstrap_ratio_se(dy, da, opt.bootstrap_b, opt.bootstrap_seed);
  fill_ci(rec, opt.level);
  return rec;
}

EstimateRecord estimate_ipw(const Dataset& data,
                            const std::vector<NuisanceModel>& models,
                            const FoldAssignment& folds, const ShiftSpec& spec,
                            const ClipSpec& clip, const EstimatorOptions& opt) {
  check_fold_setup(data, models, folds);
  const std::size_t n = data.n();
  std::vector<double> wy(n), wa(n);
  long clip_events = 0;
  bool any_weight = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = data.observations[i];
    const NuisanceModel& model = models[static_cast<std::size_t>(folds.fold_of[i])];
    const EffectiveShifts s = effective_shifts(o.z, spec);
    const RatioResult ru = density_ratio(model, o.z, -s.up, o.x, clip);
    const RatioResult rd = density_ratio(model, o.z, s.down, o.x, clip);
    if (ru.clipped) ++clip_events;
    if (rd.clipped) ++clip_events;
    const double w = ru.value - rd.value;
    if (w != 0.0) any_weight = true;
    wy[i] = w * o.y;
    wa[i] = w * o.a;
  }
  if (!any_weight) {
    throw Error(ErrKind::DegenerateIntervention, ErrClass::Estimation,
                "all weights vanish; the weighted contrast is empty");
  }
  const double num = mean(wy);
  const double den = mean(wa);
  if (std::abs(den) < opt.weak_threshold) {
    throw Error(ErrKind::WeakInstrument, ErrClass::Estimation,
                "|denominator| = " + std::to_string(std::abs(den)) +
                    " below threshold " + std::to_string(opt.weak_threshold));
  }
  EstimateRecord rec;
  rec.kind = EstimatorKind::Ipw;
  rec.delta = spec.delta;
  rec.numerator = num;
  rec.denominator = den;
  rec.psi_hat = num / den;
  rec.complier_fraction = std::abs(den);
  rec.complier_flag = rec.complier_fraction > 1.05;
  rec.n_clipped = clip_events;
  rec.se = bootstrap_ratio_se(wy, wa, opt.bootstrap_b, opt.bootstrap_seed);
  fill_ci(rec, opt.level);
  return rec;
}

EstimateRecord estimate_tsls(const Dataset& data, double level) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.n());
  const Eigen::Index d = static_cast<Eigen::Index>(data.dim_x());
  const Eigen::Index p = d + 2;
  if (n < p) {
    throw Error(ErrKind::RankDeficientDesign, ErrClass::Estimation,
                "fewer rows than design columns");
  }
  Eigen::MatrixXd first(n, p);  // (1, X, Z)
  Eigen::VectorXd a(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& o = data.observations[static_cast<std::size_t>(i)];
    first(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      first(i, 1 + j) = o.x[static_cast<std::size_t>(j)];
    }
    first(i, p - 1) = o.z;
    a[i] = o.a;
    y[i] = o.y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr1(first);
  if (qr1.rank() < p) {
    throw Error(ErrKind::RankDeficientDesign, ErrClass::Estimation,
                "first-stage design is rank deficient");
  }
  const Eigen::VectorXd a_hat = first * qr1.solve(a);

  Eigen::MatrixXd second = first;  // (1, X, A_hat)
  second.col(p - 1) = a_hat;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(second);
  if (qr2.rank() < p) {
    throw Error(ErrKind::RankDeficientDesign, ErrClass::Estimation,
                "second-stage design is rank deficient");
  }
  const Eigen::VectorXd beta = qr2.solve(y);

  // Sandwich variance with residuals from the observed treatment.
  Eigen::MatrixXd actual = first;
  actual.col(p - 1) = a;
  const Eigen::VectorXd resid = y - actual * beta;
  const Eigen::MatrixXd bread =
      (second.transpose() * second).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd meat =
      second.transpose() * resid.array().square().matrix().asDiagonal() * second;
  const Eigen::MatrixXd cov = bread * meat * bread;

  EstimateRecord rec;
  rec.kind = EstimatorKind::Tsls;
  rec.psi_hat = beta[p - 1];
  rec.se = std::sqrt(std::max(cov(p - 1, p - 1), 0.0));
  fill_ci(rec, level);
  return rec;
}

CrossFitResult cross_fit_run(const Dataset& data, const CrossFitConfig& config) {
  if (config.delta_grid.empty()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config, "empty shift grid");
  }
  for (std::size_t g = 0; g < config.delta_grid.size(); ++g) {
    if (!(config.delta_grid[g] > 0.0)) {
      throw Error(ErrKind::DegenerateIntervention, ErrClass::Config,
                  "shift grid values must be strictly positive");
    }
    if (g > 0 && !(config.delta_grid[g] > config.delta_grid[g - 1])) {
      throw Error(ErrKind::BadArgument, ErrClass::Config,
                  "shift grid must be strictly ascending");
    }
  }
  const std::size_t n = data.n();
  const FoldAssignment folds = kfold_split(n, config.k, config.seed);

  std::vector<std::vector<std::size_t>> train_sets(
      static_cast<std::size_t>(config.k));
  for (std::size_t f = 0; f < train_sets.size(); ++f) {
    train_sets[f].reserve(n - n / train_sets.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < train_sets.size(); ++f) {
      if (static_cast<std::size_t>(folds.fold_of[i]) != f) {
        train_sets[f].push_back(i);
      }
    }
  }
  std::vector<NuisanceModel> models(static_cast<std::size_t>(config.k));
  parallel_for(models.size(), config.threads, [&](std::size_t f) {
    NuisanceConfig nc = config.nuisance;
    nc.seed = Rng(config.seed).derive(0x666f6c64666974, f).next_u64();
    models[f] = fit_nuisance(data, train_sets[f], nc);
  });

  CrossFitResult result;
  result.folds_info.reserve(models.size());
  for (const NuisanceModel& m : models) {
    result.folds_info.push_back(
        {m.mu.learner_descriptor, m.lambda.learner_descriptor, m.pi.sigma});
  }

  const std::size_t n_deltas = config.delta_grid.size();
  result.influence.n = n;
  result.influence.deltas = config.delta_grid;
  result.influence.values.assign(n * n_deltas, 0.0);

  const EstimateRecord tsls = estimate_tsls(data, config.options.level);
  for (std::size_t g = 0; g < n_deltas; ++g) {
    ShiftSpec spec{config.delta_grid[g], config.support};
    EstimatorOptions opt = config.options;
    opt.bootstrap_seed =
        Rng(config.seed).derive(0x706c7567696e, g).next_u64();
    result.plugin_records.push_back(
        estimate_plugin(data, models, folds, spec, opt));
    opt.bootstrap_seed = Rng(config.seed).derive(0x697077, g).next_u64();
    result.ipw_records.push_back(
        estimate_ipw(data, models, folds, spec, config.clip, opt));
    IfEstimate ife = estimate_if(data, models, folds, spec, config.clip, opt);
    for (std::size_t i = 0; i < n; ++i) {
      result.influence.values[i * n_deltas + g] = ife.influence[i];
    }
    result.if_records.push_back(ife.record);
    EstimateRecord t = tsls;
    t.delta = config.delta_grid[g];
    result.tsls_records.push_back(t);
  }
  return result;
}

}  // namespace shiftiv

#include "shiftiv/simlab.hpp"

#include <algorithm>
#include <cmath>

#include "shiftiv/inference.hpp"
#include "shiftiv/parallel.hpp"
#include "shiftiv/rng.hpp"
#include "shiftiv/stats.hpp"

namespace shiftiv {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * x[j];
  return s;
}

bool is_excludable(const Error& e) {
  return e.kind() == ErrKind::WeakInstrument ||
         e.kind() == ErrKind::DegenerateIntervention;
}

}  // namespace

NuisanceModel kennedy_oracle(const KennedyDgp& dgp) {
  const double psi = dgp.psi_true;
  const std::vector<double> alpha = dgp.alpha;
  const double sigma = std::sqrt(dgp.z_noise_variance);

  NuisanceModel model;
  model.mu.raw = [psi](double z, const std::vector<double>&) {
    return psi * normal_cdf(z);
  };
  model.mu.target_kind = TargetKind::Continuous;
  model.mu.learner_descriptor = "oracle:mu";

  model.lambda.raw = [](double z, const std::vector<double>&) {
    return normal_cdf(z);
  };
  model.lambda.target_kind = TargetKind::Binary;
  model.lambda.learner_descriptor = "oracle:lambda";

  model.pi.mean_evaluator = [alpha](const std::vector<double>& x) {
    return dot(alpha, x);
  };
  model.pi.sigma = sigma;
  model.pi.evaluator = [alpha, sigma](double z, const std::vector<double>& x) {
    return normal_pdf((z - dot(alpha, x)) / sigma) / sigma;
  };
  return model;
}

KennedySample gen_kennedy(const KennedyDgp& dgp, std::size_t n) {
  if (n < 1) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "sample size must be at least 1");
  }
  if (dgp.alpha.empty() || !(dgp.z_noise_variance > 0.0)) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "instrument score needs covariates and positive noise variance");
  }
  const std::size_t d = dgp.alpha.size();
  const double z_sd = std::sqrt(dgp.z_noise_variance);

  Rng rng = Rng(dgp.seed).derive(0x6b656e);
  KennedySample out;
  out.data.covariate_names.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.data.covariate_names.push_back("x" + std::to_string(j + 1));
  }
  out.data.observations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.x.resize(d);
    for (std::size_t j = 0; j < d; ++j) o.x[j] = rng.normal();
    const double y0 = rng.normal();
    o.z = dot(dgp.alpha, o.x) + z_sd * rng.normal();
    o.a = o.z >= y0 ? 1.0 : 0.0;
    o.y = y0 + dgp.psi_true * o.a;
    out.data.observations.push_back(std::move(o));
  }
  out.oracle = kennedy_oracle(dgp);
  return out;
}

NuisanceModel perturb(const NuisanceModel& oracle, std::size_t n, double k,
                      std::uint64_t seed) {
  if (!(k > 0.0) || !is_finite(k)) return oracle;
  const double s = std::pow(static_cast<double>(n), -1.0 / k);

  Rng rng = Rng(seed).derive(0x70657274);
  const double c_mu = rng.normal();
  const double c_lam = rng.normal();
  const double e_loc = 1.0 + rng.normal();

  NuisanceModel out;
  {
    RegressionFit base = oracle.mu;
    out.mu.raw = [base, c_mu, s](double z, const std::vector<double>& x) {
      return base(z, x) + (c_mu + z) * s;
    };
    out.mu.target_kind = TargetKind::Continuous;
    out.mu.learner_descriptor = "perturbed(" + base.learner_descriptor + ")";
  }
  {
    RegressionFit base = oracle.lambda;
    out.lambda.raw = [base, c_lam, s](double z, const std::vector<double>& x) {
      return base(z, x) + (c_lam + z) * s;
    };
    out.lambda.target_kind = TargetKind::Continuous;
    out.lambda.learner_descriptor =
        "perturbed(" + base.learner_descriptor + ")";
  }
  {
    const auto base_mean = oracle.pi.mean_evaluator;
    const double var = std::max(
        oracle.pi.sigma * oracle.pi.sigma / (1.0 + s), 1e-6);
    const double sd = std::sqrt(var);
    out.pi.mean_evaluator = [base_mean, e_loc, s](const std::vector<double>& x) {
      return base_mean(x) + e_loc * s;
    };
    out.pi.sigma = sd;
    const auto mean_ev = out.pi.mean_evaluator;
    out.pi.evaluator = [mean_ev, sd](double z, const std::vector<double>& x) {
      return std::max(normal_pdf((z - mean_ev(x)) / sd) / sd, 1e-6);
    };
  }
  return out;
}

StudyTable rate_study(const RateStudyConfig& config) {
  if (config.reps < 2) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "rate study needs at least 2 replications");
  }
  if (config.ns.empty() || config.ks.empty() || config.deltas.empty()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "rate study grids must be nonempty");
  }
  for (double d : config.deltas) {
    if (!(d > 0.0)) {
      throw Error(ErrKind::DegenerateIntervention, ErrClass::Config,
                  "shift values must be strictly positive");
    }
  }

  struct RepSlot {
    double psi_if = 0.0, se_if = 0.0;
    double psi_pl = 0.0, se_pl = 0.0;
    bool if_ok = false, pl_ok = false;
  };

  StudyTable table;
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  for (std::size_t i_n = 0; i_n < config.ns.size(); ++i_n) {
    const std::size_t n = config.ns[i_n];
    for (std::size_t i_k = 0; i_k < config.ks.size(); ++i_k) {
      const double k = config.ks[i_k];
      for (std::size_t i_d = 0; i_d < config.deltas.size(); ++i_d) {
        const double delta = config.deltas[i_d];
        std::vector<RepSlot> slots(reps);
        parallel_for(reps, config.threads, [&](std::size_t r) {
          const Rng cell = Rng(config.seed).derive(i_n, i_k, i_d, r);
          KennedyDgp dgp = config.dgp;
          dgp.seed = cell.derive(0).next_u64();
          const KennedySample sample = gen_kennedy(dgp, n);
          const NuisanceModel model =
              perturb(sample.oracle, n, k, cell.derive(1).next_u64());
          const std::vector<NuisanceModel> models{model};
          const FoldAssignment folds = FoldAssignment::single(n);
          const ShiftSpec spec{delta, std::nullopt};
          EstimatorOptions opt;
          opt.weak_threshold = config.weak_threshold;
          opt.bootstrap_b = config.plugin_bootstrap_b;
          opt.bootstrap_seed = cell.derive(2).next_u64();
          RepSlot& slot = slots[r];
          try {
            const IfEstimate est = estimate_if(sample.data, models, folds,
                                               spec, config.clip, opt);
            slot.psi_if = est.record.psi_hat;
            slot.se_if = est.record.se;
            slot.if_ok = true;
          } catch (const Error& e) {
            if (!is_excludable(e)) throw;
          }
          try {
            const EstimateRecord rec =
                estimate_plugin(sample.data, models, folds, spec, opt);
            slot.psi_pl = rec.psi_hat;
            slot.se_pl = rec.se;
            slot.pl_ok = true;
          } catch (const Error& e) {
            if (!is_excludable(e)) throw;
          }
        });
        const auto reduce = [&](const char* name, bool RepSlot::*ok,
                                double RepSlot::*psi, double RepSlot::*se) {
          StudyRow row;
          row.n = n;
          row.k = k;
          row.delta = delta;
          row.estimator = name;
          std::vector<double> psis, ses;
          for (const RepSlot& slot : slots) {
            if (slot.*ok) {
              psis.push_back(slot.*psi);
              ses.push_back(slot.*se);
            }
          }
          row.reps_used = static_cast<int>(psis.size());
          row.excluded = config.reps - row.reps_used;
          if (!psis.empty()) {
            row.mean_bias = mean(psis) - config.dgp.psi_true;
            row.emp_sd = sdev(psis);
            row.mean_se = mean(ses);
          }
          table.rows.push_back(std::move(row));
        };
        reduce("plugin", &RepSlot::pl_ok, &RepSlot::psi_pl, &RepSlot::se_pl);
        reduce("if", &RepSlot::if_ok, &RepSlot::psi_if, &RepSlot::se_if);
      }
    }
  }
  return table;
}

std::pair<double, double> positivity_support(int x) {
  return x == 0 ? std::make_pair(-3.0, 1.0) : std::make_pair(-1.0, 3.0);
}

PositivitySample gen_positivity(std::size_t n, std::uint64_t seed) {
  if (n < 1) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "sample size must be at least 1");
  }
  Rng rng = Rng(seed).derive(0x706f73);
  PositivitySample out;
  out.x.reserve(n);
  out.z.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = rng.uniform01() < 0.5 ? 0 : 1;
    const auto [a, b] = positivity_support(x);
    const double mu = 2.0 * x - 1.0;
    const double sigma = 0.5;
    const double pa = normal_cdf((a - mu) / sigma);
    const double pb = normal_cdf((b - mu) / sigma);
    const double p = pa + rng.uniform01() * (pb - pa);
    out.x.push_back(x);
    out.z.push_back(mu + sigma * normal_quantile(p));
  }
  return out;
}

ViolationCounts count_violations(const PositivitySample& sample, double delta) {
  if (!(delta > 0.0)) {
    throw Error(ErrKind::DegenerateIntervention, ErrClass::Config,
                "shift must be strictly positive");
  }
  constexpr double kMarginalLo = -3.0, kMarginalHi = 3.0;
  ViolationCounts counts;
  for (std::size_t i = 0; i < sample.x.size(); ++i) {
    const auto [a, b] = positivity_support(sample.x[i]);
    if (a > kMarginalLo || b < kMarginalHi) ++counts.usual;
    const double z = sample.z[i];
    if (z - delta < a || z + delta > b) ++counts.shift;
  }
  return counts;
}

CoverageTable coverage_study(const CoverageConfig& config) {
  if (config.reps < 100) {
    throw Error(ErrKind::BadArgument, ErrClass::Config,
                "coverage study needs at least 100 replications");
  }
  const std::size_t n_deltas = config.delta_grid.size();
  if (n_deltas == 0) {
    throw Error(ErrKind::BadConfig, ErrClass::Config, "empty shift grid");
  }
  for (std::size_t g = 0; g < n_deltas; ++g) {
    if (!(config.delta_grid[g] > 0.0)) {
      throw Error(ErrKind::DegenerateIntervention, ErrClass::Config,
                  "shift grid values must be strictly positive");
    }
    if (g > 0 && !(config.delta_grid[g] > config.delta_grid[g - 1])) {
      throw Error(ErrKind::BadArgument, ErrClass::Config,
                  "shift grid must be strictly ascending");
    }
  }

  struct RepSlot {
    std::vector<char> pw;
    char unif = 0;
    char reject = 0;
    char ok = 0;
  };

  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const NuisanceModel oracle = kennedy_oracle(config.dgp);
  const std::vector<NuisanceModel> models{oracle};
  std::vector<RepSlot> slots(reps);
  parallel_for(reps, config.threads, [&](std::size_t r) {
    const Rng base = Rng(config.seed).derive(0x636f76, r);
    KennedyDgp dgp = config.dgp;
    dgp.seed = base.derive(0).next_u64();
    const KennedySample sample = gen_kennedy(dgp, config.n);
    const FoldAssignment folds = FoldAssignment::single(config.n);
    EstimatorOptions opt;
    opt.level = config.level;
    opt.weak_threshold = config.weak_threshold;

    RepSlot& slot = slots[r];
    slot.pw.assign(n_deltas, 0);
    InfluenceMatrix inf;
    inf.n = config.n;
    inf.deltas = config.delta_grid;
    inf.values.assign(config.n * n_deltas, 0.0);
    std::vector<double> psis(n_deltas, 0.0);
    try {
      for (std::size_t g = 0; g < n_deltas; ++g) {
        const ShiftSpec spec{config.delta_grid[g], std::nullopt};
        const IfEstimate est =
            estimate_if(sample.data, models, folds, spec, config.clip, opt);
        psis[g] = est.record.psi_hat;
        slot.pw[g] = est.record.ci_lo <= config.dgp.psi_true &&
                             config.dgp.psi_true <= est.record.ci_hi
                         ? 1
                         : 0;
        for (std::size_t i = 0; i < config.n; ++i) {
          inf.values[i * n_deltas + g] = est.influence[i];
        }
      }
      const UniformBand band =
          multiplier_bootstrap(inf, psis, config.bootstrap_b,
                               base.derive(1).next_u64(), config.level, 1);
      bool covered = true;
      for (std::size_t g = 0; g < n_deltas; ++g) {
        covered = covered && band.lo[g] <= config.dgp.psi_true &&
                  config.dgp.psi_true <= band.hi[g];
      }
      slot.unif = covered ? 1 : 0;
      slot.reject = homogeneity_test(band).reject ? 1 : 0;
      slot.ok = 1;
    } catch (const Error& e) {
      if (!is_excludable(e)) throw;
      slot.ok = 0;
    }
  });

  CoverageTable table;
  table.deltas = config.delta_grid;
  table.pointwise.assign(n_deltas, 0.0);
  std::vector<long> pw_hits(n_deltas, 0);
  long unif_hits = 0, rejects = 0;
  for (const RepSlot& slot : slots) {
    if (!slot.ok) {
      ++table.excluded;
      continue;
    }
    ++table.reps_used;
    for (std::size_t g = 0; g < n_deltas; ++g) pw_hits[g] += slot.pw[g];
    unif_hits += slot.unif;
    rejects += slot.reject;
  }
  if (table.reps_used > 0) {
    const double used = static_cast<double>(table.reps_used);
    for (std::size_t g = 0; g < n_deltas; ++g) {
      table.pointwise[g] = static_cast<double>(pw_hits[g]) / used;
    }
    table.uniform = static_cast<double>(unif_hits) / used;
    table.homogeneity_reject_rate = static_cast<double>(rejects) / used;
  }
  return table;
}

}  // namespace shiftiv

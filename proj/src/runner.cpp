#include "shiftiv/runner.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "shiftiv/estimator.hpp"
#include "shiftiv/inference.hpp"
#include "shiftiv/rng.hpp"
#include "shiftiv/simlab.hpp"

namespace shiftiv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrKind::IoError, ErrClass::Data,
                "cannot open \"" + path.string() + "\" for writing");
  }
  out << content;
  if (!out) {
    throw Error(ErrKind::IoError, ErrClass::Data,
                "failed writing \"" + path.string() + "\"");
  }
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

void write_manifest(const RunConfig& config, const fs::path& dir) {
  json cfg = config_to_json(config);
  // Execution knobs: neither changes any output byte, so a manifest rerun
  // reproduces the directory exactly even from another location or core
  // count.
  cfg.erase("threads");
  cfg.erase("out");
  json manifest;
  manifest["config"] = cfg;
  manifest["version"] = kVersion;
  write_json(dir / "manifest.json", manifest);
}

json record_json(const EstimateRecord& rec) {
  json j;
  j["delta"] = rec.delta;
  j["psi_hat"] = rec.psi_hat;
  j["numerator"] = rec.numerator;
  j["denominator"] = rec.denominator;
  j["complier_fraction"] = rec.complier_fraction;
  j["complier_flag"] = rec.complier_flag;
  j["se"] = rec.se;
  j["ci_lo"] = rec.ci_lo;
  j["ci_hi"] = rec.ci_hi;
  if (rec.has_uniform) {
    j["ci_uniform_lo"] = rec.unif_lo;
    j["ci_uniform_hi"] = rec.unif_hi;
  }
  j["n_clipped"] = rec.n_clipped;
  j["estimator"] = estimator_kind_name(rec.kind);
  return j;
}

json diagnostics_records(const std::vector<EstimateRecord>& recs) {
  json arr = json::array();
  for (const EstimateRecord& rec : recs) {
    json j;
    j["delta"] = rec.delta;
    j["denominator"] = rec.denominator;
    j["complier_fraction"] = rec.complier_fraction;
    j["complier_flag"] = rec.complier_flag;
    j["n_clipped"] = rec.n_clipped;
    arr.push_back(std::move(j));
  }
  return arr;
}

void run_estimate(const RunConfig& config, const fs::path& dir) {
  if (config.dataset.empty()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "config key \"dataset\" is required for estimate");
  }
  ColumnMapping mapping{config.col_y, config.col_a, config.col_z,
                        config.col_x};
  const Dataset data = load_csv(config.dataset, mapping);
  const ValidationReport report = validate(data);
  if (!report.ok()) {
    throw Error(ErrKind::NonNumericCell, ErrClass::Data,
                "dataset failed validation: " + report.violations[0].invariant);
  }

  CrossFitConfig cc;
  cc.k = config.folds;
  cc.seed = config.seed;
  cc.nuisance.learners = parse_learners(config.learners);
  cc.nuisance.stack_split = config.stack_split;
  cc.nuisance.bandwidth_scale = config.bandwidth_scale;
  cc.nuisance.seed = config.seed;
  cc.delta_grid = config.delta_grid;
  if (config.z_min && config.z_max) {
    cc.support = std::make_pair(*config.z_min, *config.z_max);
  }
  cc.clip = ClipSpec{config.clip_eps, config.clip_max};
  cc.options.level = config.level;
  cc.options.weak_threshold = config.weak_threshold;
  cc.options.bootstrap_b = config.plugin_bootstrap_b;
  cc.threads = config.threads;

  CrossFitResult result = cross_fit_run(data, cc);

  std::vector<double> psis;
  psis.reserve(result.if_records.size());
  for (const EstimateRecord& rec : result.if_records) {
    psis.push_back(rec.psi_hat);
  }
  const UniformBand band = multiplier_bootstrap(
      result.influence, psis, config.bootstrap_b,
      Rng(config.seed).derive(0x62616e64).next_u64(), config.level,
      config.threads);
  const HomogeneityResult homog = homogeneity_test(band);
  for (std::size_t g = 0; g < result.if_records.size(); ++g) {
    result.if_records[g].has_uniform = true;
    result.if_records[g].unif_lo = band.lo[g];
    result.if_records[g].unif_hi = band.hi[g];
  }

  json results;
  json estimates;
  const auto records_json = [](const std::vector<EstimateRecord>& recs) {
    json arr = json::array();
    for (const EstimateRecord& rec : recs) arr.push_back(record_json(rec));
    return arr;
  };
  estimates["plugin"] = records_json(result.plugin_records);
  estimates["ipw"] = records_json(result.ipw_records);
  estimates["if"] = records_json(result.if_records);
  estimates["tsls"] = records_json(result.tsls_records);
  results["estimates"] = std::move(estimates);
  json band_json;
  band_json["deltas"] = band.deltas;
  band_json["psi_hat"] = band.psi;
  band_json["lo"] = band.lo;
  band_json["hi"] = band.hi;
  band_json["sigmas"] = band.sigmas;
  band_json["critical_value"] = band.critical_value;
  band_json["level"] = band.level;
  band_json["b"] = band.b;
  band_json["seed"] = band.seed;
  results["uniform_band"] = std::move(band_json);
  json homog_json;
  homog_json["reject"] = homog.reject;
  if (homog.feasible_constant_range) {
    homog_json["feasible_lo"] = homog.feasible_constant_range->first;
    homog_json["feasible_hi"] = homog.feasible_constant_range->second;
  } else {
    homog_json["feasible_lo"] = nullptr;
    homog_json["feasible_hi"] = nullptr;
  }
  results["homogeneity"] = std::move(homog_json);
  write_json(dir / "results.json", results);

  std::string bands = "delta,psi_hat,pw_lo,pw_hi,unif_lo,unif_hi\n";
  for (std::size_t g = 0; g < result.if_records.size(); ++g) {
    const EstimateRecord& rec = result.if_records[g];
    bands += fmt(rec.delta) + "," + fmt(rec.psi_hat) + "," + fmt(rec.ci_lo) +
             "," + fmt(rec.ci_hi) + "," + fmt(band.lo[g]) + "," +
             fmt(band.hi[g]) + "\n";
  }
  write_file(dir / "bands.csv", bands);

  std::string influence;
  for (std::size_t g = 0; g < result.influence.deltas.size(); ++g) {
    if (g > 0) influence += ",";
    influence += "delta_" + fmt(result.influence.deltas[g]);
  }
  influence += "\n";
  const std::size_t n_deltas = result.influence.deltas.size();
  for (std::size_t i = 0; i < result.influence.n; ++i) {
    for (std::size_t g = 0; g < n_deltas; ++g) {
      if (g > 0) influence += ",";
      influence += fmt(result.influence.values[i * n_deltas + g]);
    }
    influence += "\n";
  }
  write_file(dir / "influence.csv", influence);

  json diag;
  diag["n"] = data.n();
  diag["dim_x"] = data.dim_x();
  diag["validation"] = json::parse(report.to_json());
  json folds_json = json::array();
  for (const FoldModelInfo& info : result.folds_info) {
    json f;
    f["mu"] = info.mu_descriptor;
    f["lambda"] = info.lambda_descriptor;
    f["pi_sigma"] = info.pi_sigma;
    folds_json.push_back(std::move(f));
  }
  diag["fold_models"] = std::move(folds_json);
  json per_estimator;
  per_estimator["if"] = diagnostics_records(result.if_records);
  per_estimator["plugin"] = diagnostics_records(result.plugin_records);
  per_estimator["ipw"] = diagnostics_records(result.ipw_records);
  diag["estimators"] = std::move(per_estimator);
  diag["weak_threshold"] = config.weak_threshold;
  write_json(dir / "diagnostics.json", diag);
}

void run_simulate(const RunConfig& config, const fs::path& dir) {
  if (config.dgp == "kennedy") {
    KennedyDgp dgp{config.alpha, config.psi_true, config.z_noise_variance,
                   config.seed};
    const KennedySample sample = gen_kennedy(dgp, config.n);
    save_csv(sample.data, (dir / "dataset.csv").string());
  } else {
    const PositivitySample sample = gen_positivity(config.n, config.seed);
    std::string csv = "x,z\n";
    for (std::size_t i = 0; i < sample.x.size(); ++i) {
      csv += std::to_string(sample.x[i]) + "," + fmt(sample.z[i]) + "\n";
    }
    write_file(dir / "dataset.csv", csv);
  }
}

void run_rate_study(const RunConfig& config, const fs::path& dir) {
  RateStudyConfig rc;
  rc.ns = config.rate_ns;
  rc.ks = config.rate_ks;
  rc.deltas = config.delta_grid;
  rc.reps = config.reps;
  rc.seed = config.seed;
  rc.dgp =
      KennedyDgp{config.alpha, config.psi_true, config.z_noise_variance, 0};
  rc.weak_threshold = config.weak_threshold;
  rc.clip = ClipSpec{config.clip_eps, config.clip_max};
  rc.plugin_bootstrap_b = config.plugin_bootstrap_b;
  rc.threads = config.threads;
  const StudyTable table = rate_study(rc);

  std::string csv =
      "n,k,delta,estimator,reps_used,excluded,mean_bias,emp_sd,mean_se\n";
  json rows = json::array();
  for (const StudyRow& row : table.rows) {
    csv += std::to_string(row.n) + "," + fmt(row.k) + "," + fmt(row.delta) +
           "," + row.estimator + "," + std::to_string(row.reps_used) + "," +
           std::to_string(row.excluded) + "," + fmt(row.mean_bias) + "," +
           fmt(row.emp_sd) + "," + fmt(row.mean_se) + "\n";
    json j;
    j["n"] = row.n;
    j["k"] = row.k;
    j["delta"] = row.delta;
    j["estimator"] = row.estimator;
    j["reps_used"] = row.reps_used;
    j["excluded"] = row.excluded;
    j["mean_bias"] = row.mean_bias;
    j["emp_sd"] = row.emp_sd;
    j["mean_se"] = row.mean_se;
    rows.push_back(std::move(j));
  }
  write_file(dir / "rate_study.csv", csv);
  json out;
  out["rows"] = std::move(rows);
  write_json(dir / "rate_study.json", out);
}

void run_positivity(const RunConfig& config, const fs::path& dir) {
  const PositivitySample sample = gen_positivity(config.n, config.seed);
  const ViolationCounts counts = count_violations(sample, config.delta);
  json out;
  out["n"] = config.n;
  out["delta"] = config.delta;
  out["usual_violations"] = counts.usual;
  out["shift_violations"] = counts.shift;
  // Parts of the marginal instrument support each group cannot reach.
  json regions = json::array();
  for (int x : {0, 1}) {
    const auto [a, b] = positivity_support(x);
    json region;
    region["x"] = x;
    region["support_lo"] = a;
    region["support_hi"] = b;
    region["missing_lo"] = x == 0 ? b : -3.0;
    region["missing_hi"] = x == 0 ? 3.0 : a;
    regions.push_back(std::move(region));
  }
  out["usual_violation_regions"] = std::move(regions);
  write_json(dir / "positivity.json", out);
}

void run_coverage(const RunConfig& config, const fs::path& dir) {
  CoverageConfig cc;
  cc.n = config.n;
  cc.reps = config.reps;
  cc.delta_grid = config.delta_grid;
  cc.level = config.level;
  cc.seed = config.seed;
  cc.bootstrap_b = config.bootstrap_b;
  cc.dgp =
      KennedyDgp{config.alpha, config.psi_true, config.z_noise_variance, 0};
  cc.weak_threshold = config.weak_threshold;
  cc.clip = ClipSpec{config.clip_eps, config.clip_max};
  cc.threads = config.threads;
  const CoverageTable table = coverage_study(cc);

  json out;
  out["n"] = config.n;
  out["level"] = config.level;
  out["b"] = config.bootstrap_b;
  out["reps_used"] = table.reps_used;
  out["excluded"] = table.excluded;
  out["deltas"] = table.deltas;
  out["pointwise"] = table.pointwise;
  out["uniform"] = table.uniform;
  out["homogeneity_reject_rate"] = table.homogeneity_reject_rate;
  write_json(dir / "coverage.json", out);

  std::string csv =
      "delta,pointwise_coverage,uniform_coverage,homogeneity_reject_rate\n";
  for (std::size_t g = 0; g < table.deltas.size(); ++g) {
    csv += fmt(table.deltas[g]) + "," + fmt(table.pointwise[g]) + "," +
           fmt(table.uniform) + "," + fmt(table.homogeneity_reject_rate) +
           "\n";
  }
  write_file(dir / "coverage.csv", csv);
}

}  // namespace

void run(const RunConfig& config) {
  validate_config(config);
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrKind::IoError, ErrClass::Data,
                "cannot create output directory \"" + config.out +
                    "\": " + ec.message());
  }
  if (config.subcommand == "estimate") {
    run_estimate(config, dir);
  } else if (config.subcommand == "simulate") {
    run_simulate(config, dir);
  } else if (config.subcommand == "rate-study") {
    run_rate_study(config, dir);
  } else if (config.subcommand == "positivity-demo") {
    run_positivity(config, dir);
  } else {
    run_coverage(config, dir);
  }
  write_manifest(config, dir);
}

}  // namespace shiftiv

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftiv/learners.hpp"

namespace shiftiv {

// Flat key-value run configuration. Every field has a default except the
// dataset path, which only the estimate subcommand needs. Serialization is
// lossless; unknown keys are rejected by name.
struct RunConfig {
  std::string subcommand = "estimate";
  std::string dataset;
  std::string col_y = "y";
  std::string col_a = "a";
  std::string col_z = "z";
  std::vector<std::string> col_x;
  std::vector<double> delta_grid{0.5, 1.0, 2.0, 3.0, 4.0};
  std::optional<double> z_min;
  std::optional<double> z_max;
  int folds = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  double level = 0.95;
  int bootstrap_b = 1000;
  int plugin_bootstrap_b = 500;
  double clip_eps = 1e-3;
  double clip_max = 1e3;
  double weak_threshold = 1e-3;
  std::vector<std::string> learners{"mean", "ols", "nw"};
  double stack_split = 0.8;
  double bandwidth_scale = 1.0;
  std::string out = "out";
  std::size_t n = 5000;
  int reps = 500;
  std::vector<std::size_t> rate_ns{100, 1000, 5000, 10000};
  std::vector<double> rate_ks{2.0, 3.0, 4.0, 6.0};
  std::string dgp = "kennedy";
  std::vector<double> alpha{1.0, 1.0, -1.0, -1.0};
  double psi_true = 2.0;
  double z_noise_variance = 2.0;
  double delta = 0.1;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

// Accepts either a flat config object or a run manifest wrapping one under
// a "config" key.
RunConfig config_from_file(const std::string& path);

// Cheap semantic checks (enumerations, ranges); throws with the key name.
void validate_config(const RunConfig& c);

std::vector<LearnerKind> parse_learners(const std::vector<std::string>& names);

}  // namespace shiftiv

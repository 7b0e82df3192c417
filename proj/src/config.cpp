#include "shiftiv/config.hpp"

#include <fstream>

#include "shiftiv/common.hpp"

namespace shiftiv {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const char* expected) {
  throw Error(ErrKind::BadConfig, ErrClass::Config,
              "config key \"" + key + "\" must be " + expected);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) bad_key(key, "a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    bad_key(key, "an integer");
  }
  return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    bad_key(key, "a nonnegative integer");
  }
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
    bad_key(key, "a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad_key(key, "a string");
  return v.get<std::string>();
}

std::vector<double> as_double_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad_key(key, "an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) bad_key(key, "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::size_t> as_size_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad_key(key, "an array of positive integers");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    if ((!e.is_number_integer() && !e.is_number_unsigned()) ||
        e.get<std::int64_t>() <= 0) {
      bad_key(key, "an array of positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<std::string> as_string_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad_key(key, "an array of strings");
  std::vector<std::string> out;
  for (const json& e : v) {
    if (!e.is_string()) bad_key(key, "an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "config must be a JSON object");
  }
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "subcommand") c.subcommand = as_string(v, key);
    else if (key == "dataset") c.dataset = as_string(v, key);
    else if (key == "col_y") c.col_y = as_string(v, key);
    else if (key == "col_a") c.col_a = as_string(v, key);
    else if (key == "col_z") c.col_z = as_string(v, key);
    else if (key == "col_x") c.col_x = as_string_list(v, key);
    else if (key == "delta_grid") c.delta_grid = as_double_list(v, key);
    else if (key == "z_min") c.z_min = as_double(v, key);
    else if (key == "z_max") c.z_max = as_double(v, key);
    else if (key == "folds") c.folds = as_int(v, key);
    else if (key == "seed") c.seed = as_u64(v, key);
    else if (key == "threads") c.threads = as_int(v, key);
    else if (key == "level") c.level = as_double(v, key);
    else if (key == "bootstrap_b") c.bootstrap_b = as_int(v, key);
    else if (key == "plugin_bootstrap_b") c.plugin_bootstrap_b = as_int(v, key);
    else if (key == "clip_eps") c.clip_eps = as_double(v, key);
    else if (key == "clip_max") c.clip_max = as_double(v, key);
    else if (key == "weak_threshold") c.weak_threshold = as_double(v, key);
    else if (key == "learners") c.learners = as_string_list(v, key);
    else if (key == "stack_split") c.stack_split = as_double(v, key);
    else if (key == "bandwidth_scale") c.bandwidth_scale = as_double(v, key);
    else if (key == "out") c.out = as_string(v, key);
    else if (key == "n") {
      const int n = as_int(v, key);
      if (n < 1) bad_key(key, "a positive integer");
      c.n = static_cast<std::size_t>(n);
    } else if (key == "reps") c.reps = as_int(v, key);
    else if (key == "rate_ns") c.rate_ns = as_size_list(v, key);
    else if (key == "rate_ks") c.rate_ks = as_double_list(v, key);
    else if (key == "dgp") c.dgp = as_string(v, key);
    else if (key == "alpha") c.alpha = as_double_list(v, key);
    else if (key == "psi_true") c.psi_true = as_double(v, key);
    else if (key == "z_noise_variance") c.z_noise_variance = as_double(v, key);
    else if (key == "delta") c.delta = as_double(v, key);
    else {
      throw Error(ErrKind::BadConfig, ErrClass::Config,
                  "unknown config key \"" + key + "\"");
    }
  }
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["dataset"] = c.dataset;
  j["col_y"] = c.col_y;
  j["col_a"] = c.col_a;
  j["col_z"] = c.col_z;
  j["col_x"] = c.col_x;
  j["delta_grid"] = c.delta_grid;
  if (c.z_min) j["z_min"] = *c.z_min;
  if (c.z_max) j["z_max"] = *c.z_max;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["level"] = c.level;
  j["bootstrap_b"] = c.bootstrap_b;
  j["plugin_bootstrap_b"] = c.plugin_bootstrap_b;
  j["clip_eps"] = c.clip_eps;
  j["clip_max"] = c.clip_max;
  j["weak_threshold"] = c.weak_threshold;
  j["learners"] = c.learners;
  j["stack_split"] = c.stack_split;
  j["bandwidth_scale"] = c.bandwidth_scale;
  j["out"] = c.out;
  j["n"] = c.n;
  j["reps"] = c.reps;
  j["rate_ns"] = c.rate_ns;
  j["rate_ks"] = c.rate_ks;
  j["dgp"] = c.dgp;
  j["alpha"] = c.alpha;
  j["psi_true"] = c.psi_true;
  j["z_noise_variance"] = c.z_noise_variance;
  j["delta"] = c.delta;
  return j;
}

RunConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrKind::IoError, ErrClass::Config,
                "cannot open config file \"" + path + "\"");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "cannot parse config file \"" + path + "\": " + e.what());
  }
  if (j.is_object() && j.contains("config") && j["config"].is_object()) {
    return config_from_json(j["config"]);
  }
  return config_from_json(j);
}

std::vector<LearnerKind> parse_learners(
    const std::vector<std::string>& names) {
  std::vector<LearnerKind> kinds;
  for (const std::string& name : names) {
    if (name == "mean") kinds.push_back(LearnerKind::Mean);
    else if (name == "ols") kinds.push_back(LearnerKind::Ols);
    else if (name == "nw") kinds.push_back(LearnerKind::Nw);
    else {
      throw Error(ErrKind::BadConfig, ErrClass::Config,
                  "unknown learner \"" + name +
                      "\" (expected mean, ols, or nw)");
    }
  }
  if (kinds.empty()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "config key \"learners\" must name at least one learner");
  }
  return kinds;
}

void validate_config(const RunConfig& c) {
  const bool known_sub =
      c.subcommand == "estimate" || c.subcommand == "simulate" ||
      c.subcommand == "rate-study" || c.subcommand == "positivity-demo" ||
      c.subcommand == "coverage";
  if (!known_sub) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "unknown subcommand \"" + c.subcommand + "\"");
  }
  if (c.folds < 2) {
    throw Error(ErrKind::BadFoldCount, ErrClass::Config,
                "config key \"folds\" must be at least 2");
  }
  if (c.threads < 1) bad_key("threads", "at least 1");
  if (!(c.level > 0.0 && c.level < 1.0)) bad_key("level", "inside (0, 1)");
  if (c.bootstrap_b < 100) bad_key("bootstrap_b", "at least 100");
  if (c.plugin_bootstrap_b < 2) bad_key("plugin_bootstrap_b", "at least 2");
  if (!(c.clip_eps > 0.0 && c.clip_eps < c.clip_max)) {
    bad_key("clip_eps", "positive and below clip_max");
  }
  if (!(c.weak_threshold > 0.0)) bad_key("weak_threshold", "positive");
  if (!(c.stack_split > 0.0 && c.stack_split < 1.0)) {
    bad_key("stack_split", "inside (0, 1)");
  }
  if (!(c.bandwidth_scale > 0.0)) bad_key("bandwidth_scale", "positive");
  parse_learners(c.learners);
  if (c.dgp != "kennedy" && c.dgp != "positivity") {
    bad_key("dgp", "\"kennedy\" or \"positivity\"");
  }
  if (c.z_min.has_value() != c.z_max.has_value()) {
    throw Error(ErrKind::BadConfig, ErrClass::Config,
                "config keys \"z_min\" and \"z_max\" must be set together");
  }
  if (c.z_min && !(*c.z_min < *c.z_max)) {
    bad_key("z_min", "strictly below z_max");
  }
  if (c.alpha.empty()) bad_key("alpha", "a nonempty array");
  if (!(c.z_noise_variance > 0.0)) bad_key("z_noise_variance", "positive");
  if (!is_finite(c.psi_true)) bad_key("psi_true", "finite");
  if (c.reps < 1) bad_key("reps", "at least 1");
}

}  // namespace shiftiv

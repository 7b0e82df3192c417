#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shiftiv {

struct Observation {
  double y = 0.0;
  double a = 0.0;  // must be exactly 0 or 1
  double z = 0.0;
  std::vector<double> x;
};

struct Dataset {
  std::vector<Observation> observations;
  std::vector<std::string> covariate_names;

  std::size_t n() const { return observations.size(); }
  std::size_t dim_x() const { return covariate_names.size(); }
};

struct ColumnMapping {
  std::string y;
  std::string a;
  std::string z;
  std::vector<std::string> x;
};

struct Violation {
  long row = -1;  // -1 for dataset-level violations
  std::string invariant;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_json() const;
};

// Fold ids in [0, k); sizes differ by at most one; derived deterministically
// from (n, k, seed) by seeded shuffle followed by round-robin assignment.
struct FoldAssignment {
  std::vector<int> fold_of;
  int k = 1;
  std::uint64_t seed = 0;

  // Trivial assignment used when a single model serves every row.
  static FoldAssignment single(std::size_t n) {
    FoldAssignment f;
    f.fold_of.assign(n, 0);
    f.k = 1;
    return f;
  }
};

Dataset load_csv(const std::string& path, const ColumnMapping& mapping);

void save_csv(const Dataset& data, const std::string& path);

ValidationReport validate(const Dataset& data);

FoldAssignment kfold_split(std::size_t n, int k, std::uint64_t seed);

}  // namespace shiftiv

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace shiftiv {

enum class LearnerKind { Mean, Ols, Nw };

const char* learner_name(LearnerKind k);

struct LearnerConfig {
  std::vector<LearnerKind> learners = {LearnerKind::Mean, LearnerKind::Ols,
                                       LearnerKind::Nw};
  double stack_split = 0.8;
  double bandwidth_scale = 1.0;
  // When true the linear learner's design is (1, f, f0*f1, f0*f2, ...):
  // feature 0 interacts with every other feature. Used for regressions on
  // (z, x); turned off for the density mean fit on x alone.
  bool ols_interactions = true;
  std::uint64_t seed = 1;
};

class FittedLearner {
 public:
  virtual ~FittedLearner() = default;
  virtual double predict(const Eigen::Ref<const Eigen::VectorXd>& f) const = 0;
  virtual std::string name() const = 0;
};

// Convex combination of base learners, weights on the probability simplex.
struct StackFit {
  std::vector<std::unique_ptr<FittedLearner>> learners;
  Eigen::VectorXd weights;
  std::string descriptor;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& f) const {
    double p = 0.0;
    for (std::size_t l = 0; l < learners.size(); ++l) {
      if (weights[static_cast<Eigen::Index>(l)] != 0.0) {
        p += weights[static_cast<Eigen::Index>(l)] * learners[l]->predict(f);
      }
    }
    return p;
  }
};

// Ensemble fit: base learners trained on a seeded split, weights from
// simplex-constrained least squares on the held-out part, then base learners
// refit on all rows. Requires at least 2 rows per base learner.
StackFit fit_stack(const Eigen::MatrixXd& features,
                   const Eigen::VectorXd& target, const LearnerConfig& config);

// Euclidean projection onto {w : w >= 0, sum w = 1}.
Eigen::VectorXd project_simplex(Eigen::VectorXd v);

}  // namespace shiftiv

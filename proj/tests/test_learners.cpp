#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "shiftiv/common.hpp"
#include "shiftiv/learners.hpp"

using namespace shiftiv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Two informative columns plus enough rows for any stack size.
Eigen::MatrixXd demo_features(Eigen::Index m) {
  Eigen::MatrixXd f(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t = static_cast<double>(i);
    f(i, 0) = std::sin(0.7 * t) + 0.01 * t;
    f(i, 1) = std::cos(1.3 * t) - 0.02 * t;
  }
  return f;
}

}  // namespace

TEST_SUITE("learners") {
  TEST_CASE("simplex projection known points") {
    CHECK((project_simplex(vec({0.2, 0.3, 0.5})) - vec({0.2, 0.3, 0.5}))
              .lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((project_simplex(vec({2.0, 0.0})) - vec({1.0, 0.0}))
              .lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((project_simplex(vec({1.0, 1.0})) - vec({0.5, 0.5}))
              .lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((project_simplex(vec({-1.0, 1.0})) - vec({0.0, 1.0}))
              .lpNorm<Eigen::Infinity>() < 1e-15);
  }

  TEST_CASE("simplex projection lands on the simplex") {
    const Eigen::VectorXd w = project_simplex(vec({3.2, -0.7, 0.1, 1.4}));
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("single mean learner predicts the target mean") {
    const Eigen::MatrixXd f = demo_features(10);
    Eigen::VectorXd y(10);
    for (Eigen::Index i = 0; i < 10; ++i) y[i] = static_cast<double>(i);
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Mean};
    const StackFit fit = fit_stack(f, y, cfg);
    CHECK(fit.weights.size() == 1);
    CHECK(fit.weights[0] == doctest::Approx(1.0));
    CHECK(fit.predict(vec({100.0, -3.0})) == doctest::Approx(4.5));
  }

  TEST_CASE("linear learner recovers an interacted linear signal exactly") {
    const Eigen::MatrixXd f = demo_features(40);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
      y[i] = 2.0 + 3.0 * f(i, 0) - f(i, 1) + 0.5 * f(i, 0) * f(i, 1);
    }
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Ols};
    const StackFit fit = fit_stack(f, y, cfg);
    const Eigen::VectorXd q = vec({0.37, -1.91});
    const double truth = 2.0 + 3.0 * 0.37 - (-1.91) + 0.5 * 0.37 * (-1.91);
    CHECK(fit.predict(q) == doctest::Approx(truth).epsilon(1e-9));
  }

  TEST_CASE("linear learner without interactions is additive") {
    const Eigen::MatrixXd f = demo_features(30);
    Eigen::VectorXd y(30);
    for (Eigen::Index i = 0; i < 30; ++i) y[i] = 1.0 + 2.0 * f(i, 0) + 3.0 * f(i, 1);
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Ols};
    cfg.ols_interactions = false;
    const StackFit fit = fit_stack(f, y, cfg);
    CHECK(fit.predict(vec({5.0, -2.0})) == doctest::Approx(5.0).epsilon(1e-9));
  }

  TEST_CASE("kernel learner reproduces a constant, constant features included") {
    Eigen::MatrixXd f(12, 2);
    for (Eigen::Index i = 0; i < 12; ++i) {
      f(i, 0) = static_cast<double>(i);
      f(i, 1) = 7.0;  // zero spread: this column must not contribute distance
    }
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.25);
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Nw};
    const StackFit fit = fit_stack(f, y, cfg);
    CHECK(fit.predict(vec({4.5, 7.0})) == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(fit.predict(vec({1e6, 0.0})) == doctest::Approx(3.25).epsilon(1e-12));
  }

  TEST_CASE("kernel learner stays inside the target range") {
    const Eigen::MatrixXd f = demo_features(25);
    Eigen::VectorXd y(25);
    for (Eigen::Index i = 0; i < 25; ++i) y[i] = std::sin(static_cast<double>(i));
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Nw};
    const StackFit fit = fit_stack(f, y, cfg);
    const double p = fit.predict(vec({0.1, 0.2}));
    CHECK(p >= y.minCoeff());
    CHECK(p <= y.maxCoeff());
  }

  TEST_CASE("exact-fit learner takes the whole weight") {
    const Eigen::MatrixXd f = demo_features(60);
    Eigen::VectorXd y(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
      y[i] = -1.0 + 0.8 * f(i, 0) + 2.2 * f(i, 1) - 0.3 * f(i, 0) * f(i, 1);
    }
    LearnerConfig cfg;
    cfg.learners = {LearnerKind::Mean, LearnerKind::Ols};
    const StackFit fit = fit_stack(f, y, cfg);
    CHECK(fit.weights[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.weights.minCoeff() >= 0.0);
    CHECK(fit.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.descriptor.find("stack(") == 0);
    CHECK(fit.descriptor.find("ols") != std::string::npos);
  }

  TEST_CASE("full default stack keeps weights on the simplex") {
    const Eigen::MatrixXd f = demo_features(50);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
      y[i] = f(i, 0) * f(i, 0) + 0.1 * f(i, 1);
    }
    const StackFit fit = fit_stack(f, y, LearnerConfig{});
    CHECK(fit.weights.size() == 3);
    CHECK(fit.weights.minCoeff() >= 0.0);
    CHECK(fit.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("too few rows for the requested stack") {
    const Eigen::MatrixXd f = demo_features(5);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
    try {
      fit_stack(f, y, LearnerConfig{});  // 3 learners want >= 6 rows
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::TooFewRows);
      CHECK(e.cls() == ErrClass::Estimation);
    }
  }

  TEST_CASE("empty learner list is a config error") {
    const Eigen::MatrixXd f = demo_features(10);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    LearnerConfig cfg;
    cfg.learners.clear();
    try {
      fit_stack(f, y, cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::BadConfig);
    }
  }

  TEST_CASE("same seed gives identical weights") {
    const Eigen::MatrixXd f = demo_features(50);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
      y[i] = std::sin(0.9 * static_cast<double>(i)) + 0.05 * f(i, 1);
    }
    LearnerConfig cfg;
    cfg.seed = 99;
    const StackFit a = fit_stack(f, y, cfg);
    const StackFit b = fit_stack(f, y, cfg);
    CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(a.descriptor == b.descriptor);
  }
}

#include <cmath>
#include <vector>

#include "doctest.h"
#include "shiftiv/common.hpp"
#include "shiftiv/simlab.hpp"
#include "shiftiv/stats.hpp"

using namespace shiftiv;

namespace {

constexpr double kDen1 = 0.294543;  // first-stage contrast at unit shift
constexpr double kDen2 = 0.550308;

double mean_of(const std::vector<double>& v) { return mean(v); }

}  // namespace

TEST_SUITE("simlab") {
  TEST_CASE("treatment is balanced and reproducible") {
    KennedyDgp dgp;
    dgp.seed = 3;
    const KennedySample s = gen_kennedy(dgp, 100000);
    REQUIRE(s.data.n() == 100000);
    CHECK(s.data.dim_x() == 4);
    CHECK(s.data.covariate_names[3] == "x4");
    std::vector<double> a(s.data.n());
    for (std::size_t i = 0; i < s.data.n(); ++i) {
      a[i] = s.data.observations[i].a;
    }
    CHECK(std::abs(mean_of(a) - 0.5) < 0.005);

    const KennedySample again = gen_kennedy(dgp, 100000);
    CHECK(again.data.observations[0].y == s.data.observations[0].y);
    CHECK(again.data.observations[99999].z == s.data.observations[99999].z);
  }

  TEST_CASE("oracle treatment probability matches the data") {
    KennedyDgp dgp;
    dgp.seed = 5;
    const KennedySample s = gen_kennedy(dgp, 200000);
    double taken = 0.0, total = 0.0;
    for (const Observation& o : s.data.observations) {
      if (std::abs(o.z) < 0.05) {
        total += 1.0;
        taken += o.a;
      }
    }
    REQUIRE(total > 500.0);
    CHECK(std::abs(taken / total - 0.5) < 0.025);
    CHECK(s.oracle.lambda(0.0, s.data.observations[0].x) == 0.5);
  }

  TEST_CASE("zero treatment effect estimates near zero") {
    KennedyDgp dgp;
    dgp.psi_true = 0.0;
    dgp.seed = 9;
    const KennedySample s = gen_kennedy(dgp, 20000);
    const IfEstimate est =
        estimate_if(s.data, {s.oracle}, FoldAssignment::single(s.data.n()),
                    ShiftSpec{1.0, std::nullopt}, ClipSpec{});
    CHECK(std::abs(est.record.psi_hat) < 3.0 * est.record.se);
  }

  TEST_CASE("generator validates its arguments") {
    CHECK_THROWS_AS(gen_kennedy(KennedyDgp{}, 0), Error);
    KennedyDgp no_alpha;
    no_alpha.alpha.clear();
    CHECK_THROWS_AS(gen_kennedy(no_alpha, 10), Error);
    KennedyDgp bad_var;
    bad_var.z_noise_variance = 0.0;
    CHECK_THROWS_AS(gen_kennedy(bad_var, 10), Error);
  }

  TEST_CASE("degradation switch off leaves the oracle untouched") {
    const KennedySample s = gen_kennedy(KennedyDgp{}, 1000);
    const NuisanceModel p = perturb(s.oracle, 1000, 0.0, 77);
    const std::vector<double>& x = s.data.observations[0].x;
    CHECK(p.mu(0.3, x) == s.oracle.mu(0.3, x));
    CHECK(p.lambda(-1.2, x) == s.oracle.lambda(-1.2, x));
    CHECK(p.pi.sigma == s.oracle.pi.sigma);
    CHECK(p.pi.evaluator(0.5, x) == s.oracle.pi.evaluator(0.5, x));
  }

  TEST_CASE("degraded fits stay continuous valued and seed stable") {
    const KennedySample s = gen_kennedy(KennedyDgp{}, 1000);
    const NuisanceModel a = perturb(s.oracle, 1000, 2.0, 5);
    const NuisanceModel b = perturb(s.oracle, 1000, 2.0, 5);
    const std::vector<double>& x = s.data.observations[0].x;
    CHECK(a.lambda.target_kind == TargetKind::Continuous);
    CHECK(a.mu(0.3, x) == b.mu(0.3, x));
    CHECK(a.pi.sigma == b.pi.sigma);
    CHECK(a.mu(0.3, x) != s.oracle.mu(0.3, x));
  }

  TEST_CASE("degradation error has the advertised profile") {
    const KennedySample s = gen_kennedy(KennedyDgp{}, 100);
    const std::vector<double> x(4, 0.0);
    const double rate = 0.01;  // 10000^{-1/2}
    for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      double ss = 0.0;
      const int n_seeds = 2000;
      for (int i = 0; i < n_seeds; ++i) {
        const NuisanceModel p =
            perturb(s.oracle, 10000, 2.0, static_cast<std::uint64_t>(i));
        const double err = p.mu(z, x) - s.oracle.mu(z, x);
        ss += err * err;
      }
      const double rms = std::sqrt(ss / n_seeds);
      const double expected = rate * std::sqrt(1.0 + z * z);
      CHECK(std::abs(rms - expected) / expected < 0.1);
    }
  }

  TEST_CASE("doubling the sample shrinks the injected error at the root-n rate") {
    const KennedySample s = gen_kennedy(KennedyDgp{}, 100);
    const std::vector<double> x(4, 0.0);
    const NuisanceModel p1 = perturb(s.oracle, 10000, 2.0, 123);
    const NuisanceModel p2 = perturb(s.oracle, 20000, 2.0, 123);
    const double e1 = p1.mu(0.7, x) - s.oracle.mu(0.7, x);
    const double e2 = p2.mu(0.7, x) - s.oracle.mu(0.7, x);
    REQUIRE(e1 != 0.0);
    CHECK(e2 / e1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("degraded density keeps its closed form") {
    const KennedySample s = gen_kennedy(KennedyDgp{}, 1000);
    const NuisanceModel p = perturb(s.oracle, 10000, 2.0, 31);
    const double shrink = 1.0 + std::pow(10000.0, -0.5);
    CHECK(p.pi.sigma ==
          doctest::Approx(std::sqrt(2.0 / shrink)).epsilon(1e-12));
    const std::vector<double> x(4, 0.0);
    CHECK(p.pi.evaluator(1000.0, x) == 1e-6);  // far tail hits the floor
  }

  TEST_CASE("rate table emits two estimator rows per cell") {
    RateStudyConfig cfg;
    cfg.ns = {500};
    cfg.ks = {0.0};
    cfg.deltas = {1.0};
    cfg.reps = 30;
    cfg.seed = 12;
    cfg.plugin_bootstrap_b = 50;
    const StudyTable t = rate_study(cfg);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].estimator == "plugin");
    CHECK(t.rows[1].estimator == "if");
    for (const StudyRow& r : t.rows) {
      CHECK(r.n == 500);
      CHECK(r.k == 0.0);
      CHECK(r.delta == 1.0);
      CHECK(r.reps_used == 30);
      CHECK(r.excluded == 0);
      CHECK(std::abs(r.mean_bias) < 0.5);
      CHECK(r.emp_sd > 0.0);
      CHECK(r.mean_se > 0.0);
    }
  }

  TEST_CASE("rate table is deterministic and thread invariant") {
    RateStudyConfig cfg;
    cfg.ns = {300};
    cfg.ks = {0.0, 2.0};
    cfg.deltas = {1.0};
    cfg.reps = 10;
    cfg.seed = 2;
    cfg.plugin_bootstrap_b = 50;
    const StudyTable a = rate_study(cfg);
    const StudyTable b = rate_study(cfg);
    cfg.threads = 4;
    const StudyTable c = rate_study(cfg);
    REQUIRE(a.rows.size() == 4);
    REQUIRE(c.rows.size() == 4);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].mean_bias == b.rows[i].mean_bias);
      CHECK(a.rows[i].mean_bias == c.rows[i].mean_bias);
      CHECK(a.rows[i].emp_sd == c.rows[i].emp_sd);
    }
  }

  TEST_CASE("group supports are respected exactly") {
    const PositivitySample s = gen_positivity(20000, 6);
    REQUIRE(s.x.size() == 20000);
    double n1 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto [lo, hi] = positivity_support(s.x[i]);
      CHECK(s.z[i] >= lo);
      CHECK(s.z[i] <= hi);
      if (s.x[i] == 1) {
        n1 += 1.0;
        sum1 += s.z[i];
      }
    }
    CHECK(std::abs(n1 / 20000.0 - 0.5) < 0.02);
    CHECK(std::abs(sum1 / n1 - 1.0) < 0.05);
    CHECK(positivity_support(0) == std::make_pair(-3.0, 1.0));
    CHECK(positivity_support(1) == std::make_pair(-1.0, 3.0));
  }

  TEST_CASE("violation counts on a hand-built sample") {
    PositivitySample s;
    s.x = {0, 0, 1};
    s.z = {-2.95, 0.0, 2.95};
    const ViolationCounts c = count_violations(s, 0.1);
    CHECK(c.usual == 3);
    CHECK(c.shift == 2);
    const ViolationCounts wide = count_violations(s, 4.5);
    CHECK(wide.shift == 3);
    CHECK_THROWS_AS(count_violations(s, 0.0), Error);
    CHECK_THROWS_AS(count_violations(s, -1.0), Error);
  }

  TEST_CASE("interval coverage lands near the nominal level") {
    CoverageConfig cfg;
    cfg.n = 300;
    cfg.reps = 100;
    cfg.delta_grid = {1.0};
    cfg.seed = 10;
    cfg.bootstrap_b = 200;
    const CoverageTable t = coverage_study(cfg);
    REQUIRE(t.deltas == std::vector<double>{1.0});
    REQUIRE(t.pointwise.size() == 1);
    CHECK(t.pointwise[0] >= 0.85);
    CHECK(t.pointwise[0] <= 1.0);
    CHECK(t.uniform >= t.pointwise[0]);
    CHECK(t.homogeneity_reject_rate == 0.0);
    CHECK(t.reps_used + t.excluded == 100);
    CHECK(t.reps_used > 90);
  }

  TEST_CASE("coverage study requires enough replications") {
    CoverageConfig cfg;
    cfg.reps = 50;
    try {
      coverage_study(cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::BadArgument);
      CHECK(e.cls() == ErrClass::Config);
    }
  }

  TEST_CASE("effect is flat across shift magnitudes") {
    KennedyDgp dgp;
    dgp.seed = 21;
    const KennedySample s = gen_kennedy(dgp, 20000);
    const FoldAssignment folds = FoldAssignment::single(s.data.n());
    std::vector<IfEstimate> ests;
    for (double delta : {0.5, 1.0, 2.0, 4.0}) {
      ests.push_back(estimate_if(s.data, {s.oracle}, folds,
                                 ShiftSpec{delta, std::nullopt}, ClipSpec{}));
    }
    for (std::size_t i = 0; i < ests.size(); ++i) {
      for (std::size_t j = i + 1; j < ests.size(); ++j) {
        const double gap =
            std::abs(ests[i].record.psi_hat - ests[j].record.psi_hat);
        const double scale = std::sqrt(ests[i].record.se * ests[i].record.se +
                                       ests[j].record.se * ests[j].record.se);
        CHECK(gap <= 3.0 * scale);
      }
    }
    CHECK(std::abs(ests[1].record.denominator - kDen1) < 0.02);
    CHECK(std::abs(ests[2].record.denominator - kDen2) < 0.02);
  }
}

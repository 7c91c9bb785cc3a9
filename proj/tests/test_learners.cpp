#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <doctest.h>

#include "isocal/cross_fit.hpp"
#include "isocal/learners.hpp"
#include "isocal/math_core.hpp"
#include "isocal/rng.hpp"
#include "support/builders.hpp"

using isocal::BoostedStumpsModel;
using isocal::ClipBounds;
using isocal::ConstantModel;
using isocal::Dataset;
using isocal::FeatureMatrix;
using isocal::FoldAssignment;
using isocal::LearnerKind;
using isocal::LearnerSpec;
using isocal::LinearModel;
using isocal::LogisticModel;
using isocal::NuisanceFit;
using isocal::OutcomeModel;
using isocal::PropensityModel;
using isocal::rng::Xoshiro256pp;
using isocal::testsupport::make_dataset;

namespace {

// Independent oracle for ridge logistic regression in two parameters
// (intercept, slope): exhaustive grid search with repeated zooming. Kept free
// of the library's fitting code on purpose; only the objective is shared math.
struct GridOptimum {
  double b0 = 0.0;
  double b1 = 0.0;
  double nll = 0.0;
  double step = 0.0;
};

double ridge_logistic_nll(const std::vector<double>& w,
                          const std::vector<double>& a, double b0, double b1,
                          double ridge) {
  double nll = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double eta = b0 + b1 * w[i];
    // log(1+e^eta) - a*eta, numerically safe via the max form
    const double sp =
        std::max(eta, 0.0) + std::log1p(std::exp(-std::fabs(eta)));
    nll += sp - a[i] * eta;
  }
  return nll + 0.5 * ridge * b1 * b1;
}

GridOptimum grid_search_ridge_logistic(const std::vector<double>& w,
                                       const std::vector<double>& a,
                                       double ridge) {
  double c0 = 0.0;
  double c1 = 0.0;
  double half = 40.0;
  GridOptimum best;
  for (int zoom = 0; zoom < 9; ++zoom) {
    const int g = 120;
    const double step = 2.0 * half / g;
    best.nll = HUGE_VAL;
    for (int i = 0; i <= g; ++i) {
      for (int j = 0; j <= g; ++j) {
        const double b0 = c0 - half + step * i;
        const double b1 = c1 - half + step * j;
        const double v = ridge_logistic_nll(w, a, b0, b1, ridge);
        if (v < best.nll) {
          best = GridOptimum{b0, b1, v, step};
        }
      }
    }
    c0 = best.b0;
    c1 = best.b1;
    half = 2.5 * step;
  }
  return best;
}

FeatureMatrix matrix_from_columns(std::vector<std::vector<double>> cols) {
  FeatureMatrix fm;
  fm.d = cols.size();
  fm.n = cols.empty() ? 0 : cols[0].size();
  for (const auto& c : cols) {
    fm.values.insert(fm.values.end(), c.begin(), c.end());
  }
  return fm;
}

}  // namespace

TEST_CASE("solve_spd matches known solutions and rejects indefinite input") {
  Xoshiro256pp rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t p = 1 + rep % 6;
    std::vector<double> b(p * p);
    for (double& v : b) v = rng.uniform(-1.0, 1.0);
    // a = b^T b + I is symmetric positive definite
    std::vector<double> a(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double s = (i == j) ? 1.0 : 0.0;
        for (std::size_t k = 0; k < p; ++k) s += b[k * p + i] * b[k * p + j];
        a[i * p + j] = s;
      }
    }
    std::vector<double> want(p);
    for (double& v : want) v = rng.uniform(-3.0, 3.0);
    std::vector<double> rhs(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) rhs[i] += a[i * p + j] * want[j];
    }
    const auto got = isocal::solve_spd(a, rhs, p);
    for (std::size_t i = 0; i < p; ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
    }
  }

  std::vector<double> indef{1.0, 0.0, 0.0, -1.0};
  std::vector<double> rhs{1.0, 1.0};
  CHECK_THROWS_AS(isocal::solve_spd(indef, rhs, 2), std::runtime_error);
}

TEST_CASE("fit_linear recovers noiseless linear functions exactly") {
  Xoshiro256pp rng(7);
  std::vector<double> w1(60);
  std::vector<double> w2(60);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    w1[i] = rng.uniform(-2.0, 2.0);
    w2[i] = rng.uniform(-2.0, 2.0);
    y[i] = 0.5 - w1[i] + 3.0 * w2[i];
  }
  const auto fm = matrix_from_columns({w1, w2});
  const LinearModel m = isocal::fit_linear(fm, y, 0.0);
  REQUIRE(m.coef.size() == 3);
  CHECK(std::fabs(m.coef[0] - 0.5) < 1e-8);
  CHECK(std::fabs(m.coef[1] + 1.0) < 1e-8);
  CHECK(std::fabs(m.coef[2] - 3.0) < 1e-8);

  std::vector<double> pred(60);
  m.predict_into(fm, pred);
  for (std::size_t i = 0; i < 60; ++i) CHECK(std::fabs(pred[i] - y[i]) < 1e-8);
}

TEST_CASE("fit_linear ridge shrinks slopes and keeps the intercept free") {
  std::vector<double> w{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> y{1.0, 3.0, 5.0, 7.0, 9.0};  // y = 5 + 2w
  const auto fm = matrix_from_columns({w});
  const LinearModel free_fit = isocal::fit_linear(fm, y, 0.0);
  const LinearModel shrunk = isocal::fit_linear(fm, y, 100.0);
  CHECK(std::fabs(free_fit.coef[1] - 2.0) < 1e-10);
  CHECK(std::fabs(shrunk.coef[1]) < std::fabs(free_fit.coef[1]));
  // centered design: intercept stays the response mean under any ridge
  CHECK(shrunk.coef[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("fit_logistic matches the grid-search ridge optimum") {
  // Separable four-point instance; the tiny ridge keeps the optimum finite.
  const std::vector<double> w{-1.0, -0.5, 0.5, 1.0};
  const std::vector<double> a{0.0, 0.0, 1.0, 1.0};
  const double ridge = 1e-4;

  const GridOptimum oracle = grid_search_ridge_logistic(w, a, ridge);

  LearnerSpec spec;
  spec.kind = LearnerKind::logistic;
  spec.ridge = ridge;
  spec.max_iter = 200;
  const auto fm = matrix_from_columns({w});
  const LogisticModel m = isocal::fit_logistic(fm, a, spec);
  REQUIRE(m.linear.coef.size() == 2);
  CHECK(m.diag.converged);

  for (double c : m.linear.coef) CHECK(std::isfinite(c));
  const double fit_nll =
      ridge_logistic_nll(w, a, m.linear.coef[0], m.linear.coef[1], ridge);
  CHECK(fit_nll <= oracle.nll + 1e-9);
  // The separable objective is nearly flat at the optimum (curvature ~ridge),
  // so coefficient agreement is bounded by gradient_tol/ridge, not grid step.
  CHECK(std::fabs(m.linear.coef[0] - oracle.b0) < 1e-4);
  CHECK(std::fabs(m.linear.coef[1] - oracle.b1) < 1e-4);

  std::vector<double> pred(4);
  m.predict_into(fm, pred);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(pred[i] > 0.0);
    CHECK(pred[i] < 1.0);
    CHECK(std::fabs(pred[i] - a[i]) < 0.05);  // separable: near-perfect fit
  }
}

TEST_CASE("fit_logistic on a constant feature reduces to the mean") {
  std::vector<double> w(10, 0.0);
  std::vector<double> a{1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  LearnerSpec spec;
  spec.ridge = 1e-3;
  const auto fm = matrix_from_columns({w});
  const LogisticModel m = isocal::fit_logistic(fm, a, spec);
  std::vector<double> pred(10);
  m.predict_into(fm, pred);
  for (double p : pred) CHECK(p == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("fit_logistic caps iterations and flags non-convergence") {
  const std::vector<double> w{-1.0, -0.5, 0.5, 1.0};
  const std::vector<double> a{0.0, 0.0, 1.0, 1.0};
  LearnerSpec spec;
  spec.ridge = 1e-4;
  spec.max_iter = 1;
  const auto fm = matrix_from_columns({w});
  const LogisticModel m = isocal::fit_logistic(fm, a, spec);
  CHECK_FALSE(m.diag.converged);
  CHECK(m.diag.iterations == 1);
  for (double c : m.linear.coef) CHECK(std::isfinite(c));
}

TEST_CASE("boosted stumps: one round at rate 1 recovers a step function") {
  std::vector<double> w;
  std::vector<double> y;
  for (int i = 0; i < 5; ++i) {
    w.push_back(-1.0);
    y.push_back(0.0);
    w.push_back(1.0);
    y.push_back(1.0);
  }
  LearnerSpec spec;
  spec.kind = LearnerKind::boosted_stumps;
  spec.rounds = 1;
  spec.learning_rate = 1.0;
  const auto fm = matrix_from_columns({w});
  const BoostedStumpsModel m = isocal::fit_boosted_stumps(fm, y, spec);
  REQUIRE(m.stumps.size() == 1);
  CHECK(m.stumps[0].feature == 0);
  CHECK(m.stumps[0].threshold == 0.0);  // midpoint of {-1, 1}
  std::vector<double> pred(w.size());
  m.predict_into(fm, pred);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(std::fabs(pred[i] - y[i]) < 1e-8);
  }
}

TEST_CASE("boosted stumps break ties toward low feature index and threshold") {
  // Identical columns: equal best gains on features 0 and 1.
  std::vector<double> w{1.0, 2.0, 3.0};
  std::vector<double> y{0.0, 1.0, 0.0};
  LearnerSpec spec;
  spec.rounds = 1;
  spec.learning_rate = 1.0;
  const auto fm2 = matrix_from_columns({w, w});
  const BoostedStumpsModel m2 = isocal::fit_boosted_stumps(fm2, y, spec);
  CHECK(m2.stumps[0].feature == 0);

  // Within one feature the gains at thresholds 1.5 and 2.5 are equal by
  // symmetry; the scan keeps the first (lowest) threshold.
  const auto fm1 = matrix_from_columns({w});
  const BoostedStumpsModel m1 = isocal::fit_boosted_stumps(fm1, y, spec);
  CHECK(m1.stumps[0].feature == 0);
  CHECK(m1.stumps[0].threshold == 1.5);
}

TEST_CASE("boosted stumps emit constant stumps when no split exists") {
  std::vector<double> w(6, 2.5);
  std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  LearnerSpec spec;
  spec.rounds = 3;
  spec.learning_rate = 1.0;
  const auto fm = matrix_from_columns({w});
  const BoostedStumpsModel m = isocal::fit_boosted_stumps(fm, y, spec);
  REQUIRE(m.stumps.size() == 3);
  for (const auto& s : m.stumps) {
    CHECK(s.threshold == -DBL_MAX);
    CHECK(s.left == s.right);
  }
  std::vector<double> pred(6);
  m.predict_into(fm, pred);
  for (double p : pred) CHECK(p == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("boosted stumps drive training error down on a smooth target") {
  Xoshiro256pp rng(99);
  const std::size_t n = 200;
  std::vector<double> w1(n);
  std::vector<double> w2(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    w1[i] = rng.uniform(-1.0, 1.0);
    w2[i] = rng.uniform(-1.0, 1.0);
    y[i] = std::sin(2.0 * w1[i]) + 0.5 * w2[i];
  }
  const auto fm = matrix_from_columns({w1, w2});
  LearnerSpec weak;
  weak.rounds = 5;
  weak.learning_rate = 0.1;
  LearnerSpec strong = weak;
  strong.rounds = 400;
  const auto mw = isocal::fit_boosted_stumps(fm, y, weak);
  const auto ms = isocal::fit_boosted_stumps(fm, y, strong);
  auto sse = [&](const BoostedStumpsModel& m) {
    std::vector<double> pred(n);
    m.predict_into(fm, pred);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += (pred[i] - y[i]) * (pred[i] - y[i]);
    }
    return s;
  };
  CHECK(sse(ms) < 0.05 * sse(mw));
}

TEST_CASE("fit_propensity handles every learner kind") {
  // 10 rows, mean(a) = 0.4
  Dataset ds = make_dataset(
      1, {-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0},
      {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0});

  SUBCASE("constant_mean returns the treated fraction everywhere") {
    LearnerSpec spec;
    spec.kind = LearnerKind::constant_mean;
    const PropensityModel m = isocal::fit_propensity(ds, spec);
    for (double p : m.predict(ds)) CHECK(p == 0.4);
  }

  SUBCASE("oracle returns the pi0 column exactly") {
    Dataset with_pi0 = ds;
    with_pi0.pi0.assign(ds.n, 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
      with_pi0.pi0[i] = 0.05 + 0.09 * static_cast<double>(i);
    }
    LearnerSpec spec;
    spec.kind = LearnerKind::oracle;
    const PropensityModel m = isocal::fit_propensity(with_pi0, spec);
    const auto p = m.predict(with_pi0);
    for (std::size_t i = 0; i < ds.n; ++i) CHECK(p[i] == with_pi0.pi0[i]);
    CHECK_THROWS_WITH_AS(m.predict(ds), doctest::Contains("pi0"),
                         std::invalid_argument);
  }

  SUBCASE("oracle without pi0 fails at fit time") {
    LearnerSpec spec;
    spec.kind = LearnerKind::oracle;
    CHECK_THROWS_AS(isocal::fit_propensity(ds, spec), std::invalid_argument);
  }

  SUBCASE("logistic predicts inside (0,1) and tracks the trend") {
    LearnerSpec spec;
    spec.kind = LearnerKind::logistic;
    const PropensityModel m = isocal::fit_propensity(ds, spec);
    const auto p = m.predict(ds);
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
    CHECK(p.front() < p.back());
  }

  SUBCASE("regression kinds are clamped into [1e-6, 1-1e-6]") {
    LearnerSpec spec;
    spec.kind = LearnerKind::boosted_stumps;
    spec.rounds = 50;
    spec.learning_rate = 1.0;
    const PropensityModel m = isocal::fit_propensity(ds, spec);
    const auto p = m.predict(ds);
    for (double v : p) {
      CHECK(v >= 1e-6);
      CHECK(v <= 1.0 - 1e-6);
    }
    // a is a step in w1, so the fit saturates and the clamp binds
    CHECK(p.front() == 1e-6);
    CHECK(p.back() == 1.0 - 1e-6);
  }

  SUBCASE("single-arm data is rejected for data-driven kinds") {
    Dataset all_treated = ds;
    std::fill(all_treated.treatment.begin(), all_treated.treatment.end(), 1.0);
    for (LearnerKind kind : {LearnerKind::logistic, LearnerKind::linear,
                             LearnerKind::boosted_stumps}) {
      LearnerSpec spec;
      spec.kind = kind;
      CHECK_THROWS_WITH_AS(isocal::fit_propensity(all_treated, spec),
                           doctest::Contains("all-treated"),
                           std::invalid_argument);
    }
    LearnerSpec constant;
    constant.kind = LearnerKind::constant_mean;
    const auto m = isocal::fit_propensity(all_treated, constant);
    for (double p : m.predict(all_treated)) CHECK(p == 1.0 - 1e-6);
  }
}

TEST_CASE("fit_outcome fits one model per arm") {
  SUBCASE("constant_mean returns arm-specific means") {
    Dataset ds = make_dataset(1, {0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 1.0, 1.0},
                              {1.0, 3.0, 5.0, 9.0});
    LearnerSpec spec;
    spec.kind = LearnerKind::constant_mean;
    const OutcomeModel m = isocal::fit_outcome(ds, spec);
    for (double v : m.predict(ds, 0)) CHECK(v == 2.0);
    for (double v : m.predict(ds, 1)) CHECK(v == 7.0);
  }

  SUBCASE("linear recovers a noiseless per-arm truth") {
    Xoshiro256pp rng(11);
    const std::size_t n = 80;
    std::vector<double> w(n);
    std::vector<double> a(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = rng.uniform(-2.0, 2.0);
      a[i] = (i % 2 == 0) ? 1.0 : 0.0;
      y[i] = (a[i] == 1.0) ? 1.0 + 2.0 * w[i] : -0.5 + 0.25 * w[i];
    }
    Dataset ds = make_dataset(1, w, a, y);
    LearnerSpec spec;
    spec.kind = LearnerKind::linear;
    spec.ridge = 0.0;
    const OutcomeModel m = isocal::fit_outcome(ds, spec);
    const auto mu1 = m.predict(ds, 1);
    const auto mu0 = m.predict(ds, 0);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::fabs(mu1[i] - (1.0 + 2.0 * w[i])) < 1e-8);
      CHECK(std::fabs(mu0[i] - (-0.5 + 0.25 * w[i])) < 1e-8);
    }
  }

  SUBCASE("logistic requires a binary outcome") {
    Dataset ds = make_dataset(1, {0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 1.0, 1.0},
                              {0.0, 0.5, 1.0, 0.0});
    LearnerSpec spec;
    spec.kind = LearnerKind::logistic;
    CHECK_THROWS_WITH_AS(isocal::fit_outcome(ds, spec),
                         doctest::Contains("{0,1}"), std::invalid_argument);
  }

  SUBCASE("oracle outcome learner is rejected") {
    Dataset ds = make_dataset(1, {0.1, 0.2}, {0.0, 1.0}, {0.0, 1.0});
    LearnerSpec spec;
    spec.kind = LearnerKind::oracle;
    CHECK_THROWS_AS(isocal::fit_outcome(ds, spec), std::invalid_argument);
  }

  SUBCASE("an empty arm is rejected") {
    Dataset ds = make_dataset(1, {0.1, 0.2}, {1.0, 1.0}, {0.0, 1.0});
    LearnerSpec spec;
    spec.kind = LearnerKind::constant_mean;
    CHECK_THROWS_WITH_AS(isocal::fit_outcome(ds, spec),
                         doctest::Contains("control"), std::invalid_argument);
  }
}

TEST_CASE("outcome_is_binary detects exact {0,1} data") {
  CHECK(isocal::outcome_is_binary(std::vector<double>{0.0, 1.0, 1.0, 0.0}));
  CHECK_FALSE(isocal::outcome_is_binary(std::vector<double>{0.0, 0.5}));
  CHECK_FALSE(isocal::outcome_is_binary(std::vector<double>{0.0, 1.0 + 1e-12}));
  CHECK_FALSE(isocal::outcome_is_binary(std::vector<double>{}));
}

TEST_CASE("cross_fit_nuisances scores each fold with complement models") {
  // k=2 with constant_mean learners: fold-1 rows see fold-2 means and
  // vice versa.
  Dataset ds = make_dataset(1, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8},
                            {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0},
                            {0.0, 2.0, 4.0, 6.0, 10.0, 12.0, 14.0, 16.0});
  FoldAssignment folds;
  folds.k = 2;
  folds.fold_of = {1, 1, 1, 1, 2, 2, 2, 2};
  LearnerSpec constant;
  constant.kind = LearnerKind::constant_mean;
  const NuisanceFit nf = isocal::cross_fit_nuisances(ds, folds, constant,
                                                     constant, ClipBounds{});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(nf.pi_hat[i] == 0.5);
    CHECK(nf.mu0_hat[i] == 12.0);  // mean of y on fold-2 control rows
    CHECK(nf.mu1_hat[i] == 14.0);
  }
  for (std::size_t i = 4; i < 8; ++i) {
    CHECK(nf.pi_hat[i] == 0.5);
    CHECK(nf.mu0_hat[i] == 2.0);
    CHECK(nf.mu1_hat[i] == 4.0);
  }
}

TEST_CASE("cross_fit_nuisances clips stored propensities") {
  Dataset ds = make_dataset(1, {0.1, 0.2, 0.3, 0.4}, {0.0, 1.0, 0.0, 1.0},
                            {0.0, 1.0, 1.0, 0.0});
  ds.pi0 = {0.005, 0.5, 0.999, 0.5};
  FoldAssignment folds;
  folds.k = 2;
  folds.fold_of = {1, 1, 2, 2};
  LearnerSpec pi_spec;
  pi_spec.kind = LearnerKind::oracle;
  LearnerSpec mu_spec;
  mu_spec.kind = LearnerKind::constant_mean;
  const NuisanceFit nf =
      isocal::cross_fit_nuisances(ds, folds, pi_spec, mu_spec, ClipBounds{});
  CHECK(nf.pi_hat[0] == 0.01);
  CHECK(nf.pi_hat[1] == 0.5);
  CHECK(nf.pi_hat[2] == 0.99);
  CHECK(nf.pi_hat[3] == 0.5);
}

TEST_CASE("cross_fit_nuisances annotates learner errors with the fold id") {
  // Fold 2's complement (= fold 1) is all-treated.
  Dataset ds = make_dataset(1, {0.1, 0.2, 0.3, 0.4}, {1.0, 1.0, 0.0, 1.0},
                            {0.0, 1.0, 1.0, 0.0});
  FoldAssignment folds;
  folds.k = 2;
  folds.fold_of = {1, 1, 2, 2};
  LearnerSpec spec;
  spec.kind = LearnerKind::logistic;
  LearnerSpec mu_spec;
  mu_spec.kind = LearnerKind::constant_mean;
  CHECK_THROWS_WITH_AS(
      isocal::cross_fit_nuisances(ds, folds, spec, mu_spec, ClipBounds{}),
      doctest::Contains("fold 2"), std::runtime_error);
}

TEST_CASE("cross-fitted values are pure functions of the fold complement") {
  Xoshiro256pp rng(404);
  const std::size_t n = 48;
  std::vector<double> w(n);
  std::vector<double> a(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = rng.uniform(-1.0, 1.0);
    a[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y[i] = rng.bernoulli(0.3 + 0.2 * a[i]) ? 1.0 : 0.0;
  }
  // guarantee both arms in every complement
  a[0] = 0.0;
  a[1] = 1.0;
  a[2] = 0.0;
  a[3] = 1.0;
  Dataset ds = make_dataset(1, w, a, y);
  const FoldAssignment folds = isocal::split_folds(n, 4, 99);

  LearnerSpec pi_spec;
  pi_spec.kind = LearnerKind::logistic;
  LearnerSpec mu_spec;
  mu_spec.kind = LearnerKind::logistic;
  const NuisanceFit base =
      isocal::cross_fit_nuisances(ds, folds, pi_spec, mu_spec, ClipBounds{});

  // Perturb one row of fold 3; every fold-3 row keeps bitwise-equal values.
  // (Covariates stay put: predictions are functions of w, so changing w_r
  // would change row r's own input rather than any model.)
  const auto fold3 = folds.rows_in(3);
  REQUIRE(fold3.size() >= 4);
  Dataset perturbed = ds;
  const std::size_t r = fold3[3];
  perturbed.treatment[r] = 1.0 - perturbed.treatment[r];
  perturbed.outcome[r] = 1.0 - perturbed.outcome[r];
  const NuisanceFit moved = isocal::cross_fit_nuisances(perturbed, folds,
                                                        pi_spec, mu_spec,
                                                        ClipBounds{});
  for (std::size_t row : fold3) {
    CHECK(moved.pi_hat[row] == base.pi_hat[row]);
    CHECK(moved.mu0_hat[row] == base.mu0_hat[row]);
    CHECK(moved.mu1_hat[row] == base.mu1_hat[row]);
  }
  // and some out-of-fold value actually changed
  bool any_changed = false;
  for (std::size_t row = 0; row < n; ++row) {
    if (folds.fold_of[row] != 3 && moved.pi_hat[row] != base.pi_hat[row]) {
      any_changed = true;
    }
  }
  CHECK(any_changed);
}

TEST_CASE("learner spec validation rejects out-of-range hyperparameters") {
  LearnerSpec spec;
  spec.rounds = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = LearnerSpec{};
  spec.learning_rate = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = LearnerSpec{};
  spec.learning_rate = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = LearnerSpec{};
  spec.ridge = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  CHECK(isocal::learner_kind_from_name("boosted_stumps") ==
        LearnerKind::boosted_stumps);
  CHECK_THROWS_AS(isocal::learner_kind_from_name("forest"),
                  std::invalid_argument);
}

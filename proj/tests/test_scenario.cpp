#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "isocal/scenario.hpp"

using isocal::Dataset;
using isocal::Scenario;
namespace rng = isocal::rng;

namespace {

Scenario s1() { return Scenario{1, 100}; }
Scenario s2(std::size_t d = 100) { return Scenario{2, d}; }

}  // namespace

TEST_CASE("scenario validation") {
  CHECK_NOTHROW(s1().validate());
  CHECK_NOTHROW(s2(20).validate());
  CHECK_THROWS_AS((Scenario{3, 100}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Scenario{0, 100}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(s2(19).validate(), std::invalid_argument);
  CHECK(s1().width() == 4);       // d_total only applies to scenario 2
  CHECK(s2(37).width() == 37);
}

TEST_CASE("scenario 1 formulas at the origin") {
  const std::vector<double> w{0.0, 0.0, 0.0, 0.0};
  // Frozen from a 40-digit evaluation of 1/(1+exp(0.25)).
  CHECK(isocal::scenario_pi0(s1(), w) ==
        doctest::Approx(0.43782349911420189597).epsilon(1e-14));
  // Both arms reduce to expit(1.5): the treated shift and the w2 indicator
  // cancel, and every control term vanishes at the origin.
  CHECK(isocal::scenario_mu0(s1(), 1, w) ==
        doctest::Approx(0.81757447619364365961).epsilon(1e-14));
  CHECK(isocal::scenario_mu0(s1(), 0, w) ==
        doctest::Approx(0.81757447619364365961).epsilon(1e-14));
  CHECK(isocal::scenario_tau0(s1(), w) == 0.0);
}

TEST_CASE("scenario 1 formula terms") {
  // w4 < 0 activates the control indicator and the sqrt term.
  const std::vector<double> w{0.0, 0.0, 0.0, -0.25};
  const double lo = isocal::scenario_mu0(s1(), 0, w);
  // logit = 1.5 + 2.5*sqrt(0.25) + 1.5 = 4.25.
  const double expect = 1.0 / (1.0 + std::exp(-4.25));
  CHECK(lo == doctest::Approx(expect).epsilon(1e-14));

  // w2 >= 0.5 deactivates the treated indicator.
  const std::vector<double> w2{0.0, 0.5, 0.0, 0.0};
  const double hi = isocal::scenario_mu0(s1(), 1, w2);
  CHECK(hi == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-14));
}

TEST_CASE("scenario 2 formulas") {
  std::vector<double> w(100, 0.0);
  CHECK(isocal::scenario_pi0(s2(), w) ==
        doctest::Approx(0.54983399731247791131).epsilon(1e-14));
  CHECK(isocal::scenario_tau0(s2(), w) == 3.5);
  CHECK(isocal::scenario_mu0(s2(), 0, w) == -0.5);
  CHECK(isocal::scenario_mu0(s2(), 1, w) == 3.0);

  w[0] = 1.0;  // w1 = 1, rest 0
  CHECK(isocal::scenario_tau0(s2(), w) == doctest::Approx(6.5).epsilon(1e-15));
  CHECK(isocal::scenario_pi0(s2(), w) ==
        doctest::Approx(0.42555748318834101556).epsilon(1e-14));
}

TEST_CASE("scenario 2 closed-form effect matches arm difference") {
  rng::Xoshiro256pp g(404);
  std::vector<double> w(25);
  for (int rep = 0; rep < 200; ++rep) {
    for (double& x : w) x = g.uniform(-1.0, 1.0);
    const double direct = isocal::scenario_mu0(s2(25), 1, w) -
                          isocal::scenario_mu0(s2(25), 0, w);
    CHECK(isocal::scenario_tau0(s2(25), w) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("covariates beyond index 20 are inert") {
  rng::Xoshiro256pp g(405);
  std::vector<double> w(40);
  for (double& x : w) x = g.uniform(-1.0, 1.0);
  const Scenario sc = s2(40);
  const double pi = isocal::scenario_pi0(sc, w);
  const double mu1 = isocal::scenario_mu0(sc, 1, w);
  const double tau = isocal::scenario_tau0(sc, w);
  for (std::size_t j = 20; j < 40; ++j) w[j] = g.uniform(-1.0, 1.0);
  CHECK(isocal::scenario_pi0(sc, w) == pi);
  CHECK(isocal::scenario_mu0(sc, 1, w) == mu1);
  CHECK(isocal::scenario_tau0(sc, w) == tau);
}

TEST_CASE("generate produces oracle columns and valid draws") {
  rng::Xoshiro256pp g(406);
  const Dataset ds = isocal::generate(s1(), 500, g);
  CHECK(ds.n == 500);
  CHECK(ds.d == 4);
  CHECK(ds.has_pi0());
  CHECK(ds.has_tau0());
  CHECK_FALSE(ds.has_tau_hat());
  for (std::size_t i = 0; i < ds.n; ++i) {
    CHECK(ds.pi0[i] == isocal::scenario_pi0(s1(), ds.row(i)));
    CHECK(ds.tau0[i] == isocal::scenario_tau0(s1(), ds.row(i)));
    CHECK((ds.treatment[i] == 0.0 || ds.treatment[i] == 1.0));
    CHECK((ds.outcome[i] == 0.0 || ds.outcome[i] == 1.0));
    for (std::size_t j = 0; j < ds.d; ++j) {
      CHECK(ds.row(i)[j] >= -1.0);
      CHECK(ds.row(i)[j] < 1.0);
    }
  }

  rng::Xoshiro256pp g2(406);
  const Dataset again = isocal::generate(s1(), 500, g2);
  CHECK(again.covariates == ds.covariates);
  CHECK(again.treatment == ds.treatment);
  CHECK(again.outcome == ds.outcome);

  rng::Xoshiro256pp g3(407);
  const Dataset other = isocal::generate(s1(), 500, g3);
  CHECK(other.covariates != ds.covariates);

  CHECK_THROWS_AS(isocal::generate(s1(), 0, g), std::invalid_argument);
}

TEST_CASE("scenario 2 dataset has continuous outcomes at width d_total") {
  rng::Xoshiro256pp g(408);
  const Dataset ds = isocal::generate(s2(100), 200, g);
  CHECK(ds.d == 100);
  bool non_binary = false;
  for (const double y : ds.outcome) {
    if (y != 0.0 && y != 1.0) non_binary = true;
  }
  CHECK(non_binary);
}

TEST_CASE("treatment frequency matches the propensity at a fixed point") {
  // Monte-Carlo check of the Bernoulli(A) mechanism at w = 0.
  const double p = 0.43782349911420189597;
  rng::Xoshiro256pp g(409);
  std::size_t hits = 0;
  const std::size_t n = 1000000;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.bernoulli(p)) ++hits;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(n);
  CHECK(std::fabs(freq - p) < 0.002);
}

TEST_CASE("potential outcome draws match the regression means") {
  // Empirical mean of each arm at fixed w within 3 standard errors.
  std::vector<double> w{0.3, -0.4, 0.1, -0.7};
  const Scenario sc = s1();
  const double mu1 = isocal::scenario_mu0(sc, 1, w);
  const double mu0 = isocal::scenario_mu0(sc, 0, w);
  rng::Xoshiro256pp g(410);
  const std::size_t n = 200000;
  double sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y0, y1] = isocal::draw_potential_outcomes(sc, w, g);
    sum0 += y0;
    sum1 += y1;
  }
  const double se0 = std::sqrt(mu0 * (1.0 - mu0) / static_cast<double>(n));
  const double se1 = std::sqrt(mu1 * (1.0 - mu1) / static_cast<double>(n));
  CHECK(std::fabs(sum0 / n - mu0) < 3.0 * se0);
  CHECK(std::fabs(sum1 / n - mu1) < 3.0 * se1);
}

TEST_CASE("scenario 2 outcome noise has unit variance at a fixed point") {
  std::vector<double> w(100, 0.0);
  w[1] = 0.6;
  const Scenario sc = s2();
  const double mu0 = isocal::scenario_mu0(sc, 0, w);
  rng::Xoshiro256pp g(411);
  const std::size_t n = 200000;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y0, y1] = isocal::draw_potential_outcomes(sc, w, g);
    (void)y1;
    ss += (y0 - mu0) * (y0 - mu0);
  }
  // Var of the sample variance of a normal is 2/n; 3 SEs ~ 0.0095.
  CHECK(std::fabs(ss / n - 1.0) < 0.01);
}

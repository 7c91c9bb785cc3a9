#include "isocal/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "isocal/math_core.hpp"

namespace isocal {
namespace {

double s1_logit_mu(int a, std::span<const double> w) {
  const double w1 = w[0], w2 = w[1], w3 = w[2], w4 = w[3];
  const double ad = static_cast<double>(a);
  const double cd = 1.0 - ad;
  double z = 1.5 + 1.5 * ad;
  z += 2.0 * ad * std::fabs(w1) * std::fabs(w2);
  z += -2.5 * cd * std::fabs(w2) * w3;
  z += 2.5 * w3;
  z += 2.5 * cd * std::sqrt(std::fabs(w4));
  z += -1.5 * ad * (w2 < 0.5 ? 1.0 : 0.0);
  z += 1.5 * cd * (w4 < 0.0 ? 1.0 : 0.0);
  return z;
}

// Coefficients on w1..w20 for the scenario 2 propensity logit.
constexpr double kS2PiCoef[20] = {-0.5, -0.5, -0.5, 0.5,  -0.5, 0.5,  -0.5,
                                  -0.5, -0.5, -0.2, 0.5,  -1.0, 1.0,  -1.5,
                                  1.0,  -1.0, 2.0,  -1.0, 1.5,  -1.0};

// Treated-arm, control-arm, and shared coefficients on w1..w10 / w11..w20.
constexpr double kS2TreatCoef[10] = {3.0, 0.0, 1.5, 0.0, 2.5,
                                     0.0, 1.0, 0.0, 1.0, 0.0};
constexpr double kS2CtrlCoef[10] = {0.0, 6.5, 0.0, 4.0,  0.0,
                                    -6.0, 0.0, 4.5, 0.0, 2.5};
constexpr double kS2MainCoef[10] = {1.5, -2.5, 1.0, -1.5, 3.0,
                                    -2.0, 3.0, -1.0, 1.5, -2.0};

double s2_mu(int a, std::span<const double> w) {
  const double ad = static_cast<double>(a);
  const double cd = 1.0 - ad;
  double z = -0.5 + 3.5 * ad;
  for (int j = 0; j < 10; ++j) {
    z += ad * kS2TreatCoef[j] * w[j];
    z += cd * kS2CtrlCoef[j] * w[j];
  }
  for (int j = 0; j < 10; ++j) z += kS2MainCoef[j] * w[10 + j];
  return z;
}

}  // namespace

void Scenario::validate() const {
  if (id != 1 && id != 2) {
    throw std::invalid_argument("scenario: id must be 1 or 2");
  }
  if (id == 2 && d_total < 20) {
    throw std::invalid_argument("scenario: d_total must be >= 20");
  }
}

double scenario_pi0(const Scenario& sc, std::span<const double> w) {
  if (sc.id == 1) {
    const double z = -0.25 - w[0] + 0.5 * w[1] - w[2] + 0.5 * w[3];
    return math::expit_pinned(z);
  }
  double z = 0.2;
  for (int j = 0; j < 20; ++j) z += kS2PiCoef[j] * w[j];
  return math::expit_pinned(z);
}

double scenario_mu0(const Scenario& sc, int a, std::span<const double> w) {
  if (sc.id == 1) return math::expit_pinned(s1_logit_mu(a, w));
  return s2_mu(a, w);
}

double scenario_tau0(const Scenario& sc, std::span<const double> w) {
  if (sc.id == 1) return scenario_mu0(sc, 1, w) - scenario_mu0(sc, 0, w);
  // Closed form of mu(1, w) - mu(0, w); the shared terms cancel exactly.
  double z = 3.5;
  for (int j = 0; j < 10; ++j) z += (kS2TreatCoef[j] - kS2CtrlCoef[j]) * w[j];
  return z;
}

Dataset generate(const Scenario& sc, std::size_t n, rng::Xoshiro256pp& rng) {
  sc.validate();
  if (n == 0) throw std::invalid_argument("generate: n must be positive");
  const std::size_t d = sc.width();

  Dataset ds;
  ds.n = n;
  ds.d = d;
  ds.covariates.resize(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    ds.covariates[i] = rng.uniform(-1.0, 1.0);
  }

  ds.pi0.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.pi0[i] = scenario_pi0(sc, ds.row(i));

  ds.treatment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.treatment[i] = rng.bernoulli(ds.pi0[i]) ? 1.0 : 0.0;
  }

  ds.tau0.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.tau0[i] = scenario_tau0(sc, ds.row(i));

  ds.outcome.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = ds.treatment[i] == 1.0 ? 1 : 0;
    const double mu = scenario_mu0(sc, a, ds.row(i));
    if (sc.id == 1) {
      ds.outcome[i] = rng.bernoulli(mu) ? 1.0 : 0.0;
    } else {
      ds.outcome[i] = mu + rng.normal();
    }
  }

  ds.validate();
  return ds;
}

std::pair<double, double> draw_potential_outcomes(const Scenario& sc,
                                                  std::span<const double> w,
                                                  rng::Xoshiro256pp& rng) {
  const double mu0 = scenario_mu0(sc, 0, w);
  const double mu1 = scenario_mu0(sc, 1, w);
  double y0, y1;
  if (sc.id == 1) {
    y0 = rng.bernoulli(mu0) ? 1.0 : 0.0;
    y1 = rng.bernoulli(mu1) ? 1.0 : 0.0;
  } else {
    y0 = mu0 + rng.normal();
    y1 = mu1 + rng.normal();
  }
  return {y0, y1};
}

}  // namespace isocal

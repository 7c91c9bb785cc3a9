#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "isocal/dataset.hpp"
#include "isocal/rng.hpp"

namespace isocal {

// Synthetic data-generating mechanism. id 1: four uniform confounders, binary
// outcome, nonlinear logit-scale regression. id 2: d_total uniform covariates
// of which only the first 20 enter the formulas, Gaussian outcome with unit
// noise, linear regression with treatment interactions.
struct Scenario {
  int id = 1;
  std::size_t d_total = 100;  // scenario 2 width (>= 20)

  std::size_t width() const { return id == 1 ? 4 : d_total; }
  // Throws std::invalid_argument when id or d_total is out of range.
  void validate() const;
};

// Formula evaluations at one covariate row (w.size() >= width()).
double scenario_pi0(const Scenario& sc, std::span<const double> w);
double scenario_mu0(const Scenario& sc, int a, std::span<const double> w);
double scenario_tau0(const Scenario& sc, std::span<const double> w);

// Draws a dataset with pi0 and tau0 oracle columns. Draw order is pinned:
// covariates row-major, then treatments, then outcomes, so outputs are a
// deterministic function of (sc, n, rng state).
Dataset generate(const Scenario& sc, std::size_t n, rng::Xoshiro256pp& rng);

// Independent potential-outcome pair (y0 drawn first, then y1) at w.
std::pair<double, double> draw_potential_outcomes(const Scenario& sc,
                                                  std::span<const double> w,
                                                  rng::Xoshiro256pp& rng);

}  // namespace isocal

#pragma once

#include <vector>

#include "isocal/cross_fit.hpp"
#include "isocal/dataset.hpp"

namespace isocal {

// Doubly robust AIPW pseudo-outcomes:
//   chi_i = (mu1_i - mu0_i) + (a_i - pi_i) / (pi_i * (1 - pi_i)) *
//           (y_i - (a_i == 1 ? mu1_i : mu0_i))
// Throws std::invalid_argument when nf is not aligned with ds.
std::vector<double> compute_pseudo(const Dataset& ds, const NuisanceFit& nf);

}  // namespace isocal

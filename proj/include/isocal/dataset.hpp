#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace isocal {

// Columnar observational dataset. covariates is row-major n*d; treatment holds
// exactly 0.0/1.0. Optional columns (tau_hat, tau0, pi0, fold) are empty when
// absent. fold ids are 1-based to match the CSV schema.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> covariates;
  std::vector<double> treatment;
  std::vector<double> outcome;
  std::vector<double> tau_hat;
  std::vector<double> tau0;
  std::vector<double> pi0;
  std::vector<int> fold;

  bool has_tau_hat() const { return !tau_hat.empty(); }
  bool has_tau0() const { return !tau0.empty(); }
  bool has_pi0() const { return !pi0.empty(); }
  bool has_fold() const { return !fold.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {covariates.data() + i * d, d};
  }

  // Copy of covariate column j (0-based).
  std::vector<double> column(std::size_t j) const;

  // New dataset holding the given rows (in the given order), all columns.
  Dataset subset(std::span<const std::size_t> rows) const;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

}  // namespace isocal

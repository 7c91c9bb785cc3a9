#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace isocal {

// Fold assignment over rows 0..n-1 with 1-based fold ids (CSV convention).
struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;

  std::vector<std::size_t> rows_in(int s) const;
  std::vector<std::size_t> rows_not_in(int s) const;
};

// Seeded random partition into k folds whose sizes differ by at most one.
// Deterministic function of (n, k, seed). Requires 2 <= k <= n.
FoldAssignment split_folds(std::size_t n, int k, std::uint64_t seed);

// Builds the assignment carried by a dataset's fold column (ids 1..k).
FoldAssignment folds_from_column(const std::vector<int>& fold_column);

// Seeded split into (train, calibration) index sets. The calibration size is
// round(cal_fraction*n) (half away from zero), clamped so both parts are
// nonempty. Requires n >= 2 and cal_fraction in (0,1).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_cal(
    std::size_t n, double cal_fraction, std::uint64_t seed);

}  // namespace isocal

#include "isocal/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "isocal/rng.hpp"

namespace isocal {
namespace {

// Distinct stream tags so the same user seed drives independent draws for
// fold assignment and train/cal splitting.
constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kTrainCalStream = 0x5CA1;

std::vector<std::size_t> permutation(std::size_t n, rng::Xoshiro256pp& g) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(g.next_u64() % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace

std::vector<std::size_t> FoldAssignment::rows_in(int s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == s) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(int s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != s) out.push_back(i);
  }
  return out;
}

FoldAssignment split_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_folds: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("split_folds: k exceeds number of rows");
  }
  auto g = rng::Xoshiro256pp::child(seed, kFoldStream);
  auto perm = permutation(n, g);
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.assign(n, 0);
  std::size_t q = n / static_cast<std::size_t>(k);
  std::size_t r = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int s = 1; s <= k; ++s) {
    std::size_t size = q + (static_cast<std::size_t>(s) <= r ? 1 : 0);
    for (std::size_t t = 0; t < size; ++t) fa.fold_of[perm[pos++]] = s;
  }
  return fa;
}

FoldAssignment folds_from_column(const std::vector<int>& fold_column) {
  if (fold_column.empty()) {
    throw std::invalid_argument("folds_from_column: empty fold column");
  }
  int k = *std::max_element(fold_column.begin(), fold_column.end());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k) + 1, 0);
  for (int f : fold_column) {
    if (f < 1) throw std::invalid_argument("folds_from_column: fold ids are 1-based");
    counts[static_cast<std::size_t>(f)] += 1;
  }
  for (int s = 1; s <= k; ++s) {
    if (counts[static_cast<std::size_t>(s)] == 0) {
      throw std::invalid_argument("folds_from_column: fold " + std::to_string(s) +
                                  " has no rows");
    }
  }
  if (k < 2) throw std::invalid_argument("folds_from_column: need at least 2 folds");
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of = fold_column;
  return fa;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_cal(
    std::size_t n, double cal_fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("split_train_cal: need at least 2 rows");
  if (!(cal_fraction > 0.0 && cal_fraction < 1.0)) {
    throw std::invalid_argument("split_train_cal: cal_fraction must lie in (0,1)");
  }
  auto ell = static_cast<std::size_t>(std::llround(cal_fraction * static_cast<double>(n)));
  ell = std::clamp<std::size_t>(ell, 1, n - 1);
  auto g = rng::Xoshiro256pp::child(seed, kTrainCalStream);
  auto perm = permutation(n, g);
  std::vector<std::size_t> cal(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(ell));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(ell), perm.end());
  std::sort(cal.begin(), cal.end());
  std::sort(train.begin(), train.end());
  return {train, cal};
}

}  // namespace isocal

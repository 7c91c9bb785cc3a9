#include "isocal/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isocal {

StepFunction::StepFunction(double base_level, std::vector<double> jump_points,
                           std::vector<double> increments)
    : base_(base_level), jumps_(std::move(jump_points)), incs_(std::move(increments)) {
  if (jumps_.size() != incs_.size()) {
    throw std::invalid_argument("step function: jumps/increments length mismatch");
  }
  if (!std::isfinite(base_)) throw std::invalid_argument("step function: non-finite base");
  for (std::size_t j = 0; j < jumps_.size(); ++j) {
    if (!std::isfinite(jumps_[j]) || !std::isfinite(incs_[j])) {
      throw std::invalid_argument("step function: non-finite jump or increment");
    }
    if (j > 0 && !(jumps_[j - 1] < jumps_[j])) {
      throw std::invalid_argument("step function: jump points must be strictly increasing");
    }
    if (!(incs_[j] > 0.0)) {
      throw std::invalid_argument("step function: increments must be positive");
    }
  }
  levels_.resize(jumps_.size() + 1);
  levels_[0] = base_;
  for (std::size_t j = 0; j < incs_.size(); ++j) levels_[j + 1] = levels_[j] + incs_[j];
}

double StepFunction::operator()(double t) const {
  if (levels_.empty()) return base_;
  auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
  return levels_[static_cast<std::size_t>(it - jumps_.begin())];
}

void StepFunction::evaluate(std::span<const double> t, std::span<double> out) const {
  if (t.size() != out.size()) {
    throw std::invalid_argument("step function evaluate: length mismatch");
  }
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
}

bool StepFunction::operator==(const StepFunction& other) const {
  return base_ == other.base_ && jumps_ == other.jumps_ && incs_ == other.incs_;
}

namespace {

struct Block {
  double first_x;
  double sum_w;
  double sum_wy;
  double mean;
};

void check_inputs(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw std::invalid_argument("pava: input length mismatch");
  }
  if (x.empty()) throw std::invalid_argument("pava: empty input");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(w[i])) {
      throw std::invalid_argument("pava: non-finite input");
    }
    if (!(w[i] > 0.0)) throw std::invalid_argument("pava: weights must be positive");
  }
}

}  // namespace

StepFunction pava_fit(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w) {
  check_inputs(x, y, w);
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return a < b;  // stable accumulation order within ties
  });

  std::vector<Block> blocks;
  blocks.reserve(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    double xv = x[idx[i]];
    Block b{xv, 0.0, 0.0, 0.0};
    while (i < idx.size() && x[idx[i]] == xv) {
      b.sum_w += w[idx[i]];
      b.sum_wy += w[idx[i]] * y[idx[i]];
      ++i;
    }
    b.mean = b.sum_wy / b.sum_w;
    blocks.push_back(b);
    // merge while the previous block mean is not strictly below; merging on
    // ties keeps the emitted increments strictly positive
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      prev.sum_w += top.sum_w;
      prev.sum_wy += top.sum_wy;
      prev.mean = prev.sum_wy / prev.sum_w;
    }
  }

  double base = blocks.front().mean;
  std::vector<double> jumps, incs;
  jumps.reserve(blocks.size() - 1);
  incs.reserve(blocks.size() - 1);
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    jumps.push_back(blocks[b].first_x);
    incs.push_back(blocks[b].mean - blocks[b - 1].mean);
  }
  return StepFunction(base, std::move(jumps), std::move(incs));
}

StepFunction pava_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> w(x.size(), 1.0);
  return pava_fit(x, y, w);
}

std::vector<double> block_residual_sums(const StepFunction& f,
                                        std::span<const double> x,
                                        std::span<const double> y,
                                        std::span<const double> w) {
  check_inputs(x, y, w);
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return a < b;
  });
  const auto& jumps = f.jump_points();
  const auto& levels = f.levels();
  std::vector<double> sums;
  std::size_t prev_level = static_cast<std::size_t>(-1);
  for (std::size_t t = 0; t < idx.size(); ++t) {
    std::size_t i = idx[t];
    auto it = std::upper_bound(jumps.begin(), jumps.end(), x[i]);
    auto lev = static_cast<std::size_t>(it - jumps.begin());
    if (lev != prev_level) {
      sums.push_back(0.0);
      prev_level = lev;
    }
    sums.back() += w[i] * (levels[lev] - y[i]);
  }
  return sums;
}

}  // namespace isocal

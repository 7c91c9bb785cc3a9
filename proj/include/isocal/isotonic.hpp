#pragma once

#include <span>
#include <string>
#include <vector>

namespace isocal {

// Cadlag nondecreasing step function
//   theta(t) = base_level + sum of increments[j] over jump_points[j] <= t.
// jump_points are strictly increasing, increments strictly positive. The
// cumulative levels are rebuilt from the increments on construction (pinned
// left-to-right order), so a serialization round-trip reproduces evaluations
// bit-for-bit.
class StepFunction {
 public:
  StepFunction() = default;  // constant base 0
  StepFunction(double base_level, std::vector<double> jump_points,
               std::vector<double> increments);

  double operator()(double t) const;
  void evaluate(std::span<const double> t, std::span<double> out) const;

  double base_level() const { return base_; }
  const std::vector<double>& jump_points() const { return jumps_; }
  const std::vector<double>& increments() const { return incs_; }
  const std::vector<double>& levels() const { return levels_; }

  bool operator==(const StepFunction& other) const;

 private:
  double base_ = 0.0;
  std::vector<double> jumps_;
  std::vector<double> incs_;
  std::vector<double> levels_;  // levels_[j] = value once jumps_[0..j-1] passed
};

// Weighted least-squares isotonic regression of y on x via
// pool-adjacent-violators. Ties in x are pre-pooled (weight = sum of weights,
// response = weighted mean). The returned function jumps only at observed x
// values and extends constantly outside their range.
StepFunction pava_fit(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w);
StepFunction pava_fit(std::span<const double> x, std::span<const double> y);

// Sum of w*(f(x)-y) over each maximal level set of f on the observed x,
// ordered by x. All entries vanish (up to rounding) when f was fitted on
// (x, y, w): the isotonic score equations.
std::vector<double> block_residual_sums(const StepFunction& f,
                                        std::span<const double> x,
                                        std::span<const double> y,
                                        std::span<const double> w);

// {"base_level":...,"jump_points":[...],"increments":[...]} with doubles
// written to 17 significant digits; fixed field order.
std::string step_function_to_json(const StepFunction& f);
StepFunction step_function_from_json(const std::string& text);

}  // namespace isocal

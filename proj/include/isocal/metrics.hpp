#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isocal/scenario.hpp"

namespace isocal {

// Equal-frequency binning regression used to estimate the conditional mean of
// the true effect given the prediction value.
struct GammaHatConfig {
  std::vector<int> candidate_bin_counts{5, 10, 20, 50};
  int cv_folds = 5;

  // Throws std::invalid_argument: bin counts must be >= 2, cv_folds >= 2.
  void validate() const;
};

// Piecewise-constant model. edges holds interior upper boundaries (ascending,
// strictly increasing); bin of x is the first edge >= x, else the last bin.
class GammaModel {
 public:
  GammaModel() : means_{0.0} {}
  GammaModel(std::vector<double> edges, std::vector<double> means);

  double operator()(double t) const;
  void evaluate(std::span<const double> t, std::span<double> out) const;

  std::size_t bins() const { return means_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& means() const { return means_; }

 private:
  std::vector<double> edges_;
  std::vector<double> means_;
};

// Fits bin means of true_cate over equal-frequency prediction bins; the bin
// count is chosen from cfg.candidate_bin_counts by cv_folds-fold
// cross-validated SSE (ties go to the smallest count). Candidates above n/2
// are discarded; all-equal predictions yield a single-bin model.
GammaModel estimate_gamma0(std::span<const double> predictions,
                           std::span<const double> true_cate,
                           const GammaHatConfig& cfg, std::uint64_t seed);

// (1/n) * sum_i (true_i - pred_i) * (gamma(pred_i) - pred_i).
double cal_hat(std::span<const double> predictions,
               std::span<const double> true_cate, const GammaModel& gamma);

// (1/n) * sum_i (pred_i - true_i)^2.
double mse_hat(std::span<const double> predictions,
               std::span<const double> true_cate);

inline double dis_hat(double mse, double cal) { return mse - cal; }

enum class Decile { lower, upper };

// Signed mean of gamma(pred) - pred over rows whose prediction lies at or
// below the empirical 10th percentile (lower) or at or above the 90th
// (upper). Percentiles are nearest-rank order statistics; needs n >= 10.
double bin_bias(std::span<const double> predictions, const GammaModel& gamma,
                Decile which);

// Monte-Carlo variance of Y1 - Y0 with independent arm draws given w.
// Used to standardize reported metrics; needs n_mc >= 10^4.
double ite_variance(const Scenario& sc, std::size_t n_mc, std::uint64_t seed);

// Ordinary-least-squares slope of log(cal) on log(ell). All entries must be
// positive and the ell values must not all coincide.
double rate_slope(std::span<const double> ell_values,
                  std::span<const double> cal_values);

// One evaluated predictor per row. standardizer is NaN when no scenario is
// available to compute it; it serializes as NA.
struct CalibrationReportRow {
  std::string estimator;
  bool calibrated = false;
  std::size_t n = 0;
  std::uint64_t replicate = 0;
  double cal = 0.0;
  double mse = 0.0;
  double dis = 0.0;
  double bias_lower = 0.0;
  double bias_upper = 0.0;
  double standardizer = 0.0;
  std::uint64_t seed = 0;
};

// CSV with a leading comment row documenting the potential-outcome coupling,
// then a header, then one row per entry. Reals use exact round-trip format.
std::string report_csv(std::span<const CalibrationReportRow> rows);
void write_report_csv(const std::string& path,
                      std::span<const CalibrationReportRow> rows);

}  // namespace isocal

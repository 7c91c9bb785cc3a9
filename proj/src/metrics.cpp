#include "isocal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isocal/io_util.hpp"
#include "isocal/kernels.hpp"
#include "isocal/math_core.hpp"
#include "isocal/splits.hpp"

namespace isocal {
namespace {

// Equal-frequency binning of preds with target means of vals, both restricted
// to the given rows. Interior upper edges are order statistics of the sorted
// subset: edge_t = sorted[(t*m)/B - 1]; duplicates and edges equal to the
// maximum are dropped so every bin is nonempty on the fitting rows.
GammaModel fit_binning(std::span<const double> preds,
                       std::span<const double> vals,
                       std::span<const std::size_t> rows, int bins) {
  const std::size_t m = rows.size();
  std::vector<double> sorted(m);
  for (std::size_t i = 0; i < m; ++i) sorted[i] = preds[rows[i]];
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> edges;
  for (int t = 1; t < bins; ++t) {
    const std::size_t idx = (static_cast<std::size_t>(t) * m) / bins;
    if (idx == 0) continue;
    edges.push_back(sorted[idx - 1]);
  }
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  while (!edges.empty() && edges.back() == sorted.back()) edges.pop_back();

  const std::size_t b = edges.size() + 1;
  std::vector<double> sums(b, 0.0);
  std::vector<std::size_t> counts(b, 0);
  for (const std::size_t r : rows) {
    const std::size_t bin = static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), preds[r]) -
        edges.begin());
    sums[bin] += vals[r];
    counts[bin] += 1;
  }
  std::vector<double> means(b);
  for (std::size_t j = 0; j < b; ++j) means[j] = sums[j] / counts[j];
  return GammaModel(std::move(edges), std::move(means));
}

}  // namespace

void GammaHatConfig::validate() const {
  if (candidate_bin_counts.empty()) {
    throw std::invalid_argument("gamma config: need at least one bin count");
  }
  for (const int b : candidate_bin_counts) {
    if (b < 2) throw std::invalid_argument("gamma config: bin counts >= 2");
  }
  if (cv_folds < 2) throw std::invalid_argument("gamma config: cv_folds >= 2");
}

GammaModel::GammaModel(std::vector<double> edges, std::vector<double> means)
    : edges_(std::move(edges)), means_(std::move(means)) {
  if (means_.size() != edges_.size() + 1) {
    throw std::invalid_argument("gamma model: need one more mean than edge");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i - 1] < edges_[i])) {
      throw std::invalid_argument("gamma model: edges must increase");
    }
  }
}

double GammaModel::operator()(double t) const {
  const std::size_t bin = static_cast<std::size_t>(
      std::lower_bound(edges_.begin(), edges_.end(), t) - edges_.begin());
  return means_[bin];
}

void GammaModel::evaluate(std::span<const double> t,
                          std::span<double> out) const {
  if (t.size() != out.size()) {
    throw std::invalid_argument("gamma model: size mismatch");
  }
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
}

GammaModel estimate_gamma0(std::span<const double> predictions,
                           std::span<const double> true_cate,
                           const GammaHatConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = predictions.size();
  if (true_cate.size() != n) {
    throw std::invalid_argument("estimate_gamma0: size mismatch");
  }
  if (n < 2) throw std::invalid_argument("estimate_gamma0: need n >= 2");

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  const auto [mn, mx] =
      std::minmax_element(predictions.begin(), predictions.end());
  if (*mn == *mx) return fit_binning(predictions, true_cate, all, 1);

  std::vector<int> candidates = cfg.candidate_bin_counts;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  std::erase_if(candidates,
                [n](int b) { return static_cast<std::size_t>(b) * 2 > n; });
  if (candidates.empty()) {
    throw std::invalid_argument("estimate_gamma0: no bin count fits n/2");
  }

  const FoldAssignment folds = split_folds(n, cfg.cv_folds, seed);
  int best_bins = candidates.front();
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> held_pred, held_true, held_fit;
  for (const int b : candidates) {
    double sse = 0.0;
    for (int s = 1; s <= cfg.cv_folds; ++s) {
      const std::vector<std::size_t> train = folds.rows_not_in(s);
      const std::vector<std::size_t> held = folds.rows_in(s);
      const GammaModel model = fit_binning(predictions, true_cate, train, b);
      held_pred.resize(held.size());
      held_true.resize(held.size());
      held_fit.resize(held.size());
      for (std::size_t i = 0; i < held.size(); ++i) {
        held_pred[i] = predictions[held[i]];
        held_true[i] = true_cate[held[i]];
      }
      model.evaluate(held_pred, held_fit);
      sse += kernels::sq_diff_sum(held_fit, held_true);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_bins = b;
    }
  }
  return fit_binning(predictions, true_cate, all, best_bins);
}

double cal_hat(std::span<const double> predictions,
               std::span<const double> true_cate, const GammaModel& gamma) {
  const std::size_t n = predictions.size();
  if (true_cate.size() != n) {
    throw std::invalid_argument("cal_hat: size mismatch");
  }
  if (n == 0) throw std::invalid_argument("cal_hat: empty input");
  std::vector<double> fitted(n);
  gamma.evaluate(predictions, fitted);
  return kernels::cal_cross_sum(true_cate, predictions, fitted) /
         static_cast<double>(n);
}

double mse_hat(std::span<const double> predictions,
               std::span<const double> true_cate) {
  const std::size_t n = predictions.size();
  if (true_cate.size() != n) {
    throw std::invalid_argument("mse_hat: size mismatch");
  }
  if (n == 0) throw std::invalid_argument("mse_hat: empty input");
  return kernels::sq_diff_sum(predictions, true_cate) /
         static_cast<double>(n);
}

double bin_bias(std::span<const double> predictions, const GammaModel& gamma,
                Decile which) {
  const std::size_t n = predictions.size();
  if (n < 10) throw std::invalid_argument("bin_bias: need n >= 10");
  std::vector<double> sorted(predictions.begin(), predictions.end());
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank percentiles: ceil(p*n)-th order statistics, 1-based.
  const double q_lo = sorted[(n + 9) / 10 - 1];
  const double q_hi = sorted[(9 * n + 9) / 10 - 1];

  std::vector<double> diffs;
  for (const double p : predictions) {
    const bool picked = which == Decile::lower ? p <= q_lo : p >= q_hi;
    if (picked) diffs.push_back(gamma(p) - p);
  }
  return kernels::sum(diffs) / static_cast<double>(diffs.size());
}

double ite_variance(const Scenario& sc, std::size_t n_mc, std::uint64_t seed) {
  sc.validate();
  if (n_mc < 10000) throw std::invalid_argument("ite_variance: n_mc >= 10^4");
  rng::Xoshiro256pp gen(seed);
  const std::size_t d = sc.width();
  std::vector<double> w(d);
  std::vector<double> diffs(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    for (std::size_t j = 0; j < d; ++j) w[j] = gen.uniform(-1.0, 1.0);
    const auto [y0, y1] = draw_potential_outcomes(sc, w, gen);
    diffs[i] = y1 - y0;
  }
  const double mean = kernels::sum(diffs) / static_cast<double>(n_mc);
  const std::vector<double> center(n_mc, mean);
  return kernels::sq_diff_sum(diffs, center) / static_cast<double>(n_mc - 1);
}

double rate_slope(std::span<const double> ell_values,
                  std::span<const double> cal_values) {
  const std::size_t n = ell_values.size();
  if (cal_values.size() != n) {
    throw std::invalid_argument("rate_slope: size mismatch");
  }
  if (n < 2) throw std::invalid_argument("rate_slope: need at least 2 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ell_values[i] > 0.0) || !(cal_values[i] > 0.0)) {
      throw std::invalid_argument("rate_slope: entries must be positive");
    }
    lx[i] = math::log_pinned(ell_values[i]);
    ly[i] = math::log_pinned(cal_values[i]);
  }
  const double mx = kernels::sum(lx) / static_cast<double>(n);
  const double my = kernels::sum(ly) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("rate_slope: ell values must not coincide");
  }
  return sxy / sxx;
}

namespace {

std::string field(double v) {
  if (std::isnan(v)) return "NA";
  return format_double(v);
}

}  // namespace

std::string report_csv(std::span<const CalibrationReportRow> rows) {
  std::string out = "# potential_outcome_coupling: independent_given_w\n";
  out +=
      "estimator,calibrated,n,replicate,cal,mse,dis,bias_lower,bias_upper,"
      "standardizer,seed\n";
  for (const CalibrationReportRow& r : rows) {
    out += r.estimator;
    out += ',';
    out += r.calibrated ? '1' : '0';
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += field(r.cal);
    out += ',';
    out += field(r.mse);
    out += ',';
    out += field(r.dis);
    out += ',';
    out += field(r.bias_lower);
    out += ',';
    out += field(r.bias_upper);
    out += ',';
    out += field(r.standardizer);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

void write_report_csv(const std::string& path,
                      std::span<const CalibrationReportRow> rows) {
  write_file_atomic(path, report_csv(rows));
}

}  // namespace isocal

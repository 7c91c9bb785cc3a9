#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isocal/cross_fit.hpp"
#include "isocal/dataset.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/learners.hpp"
#include "isocal/splits.hpp"

namespace isocal {

// Ensemble aggregation rule. `paper` selects the 1-based order statistic
// max(1, floor(k/2)); `standard` selects the conventional lower median
// ceil(k/2).
enum class MedianRule { paper, standard };

MedianRule median_rule_from_name(const std::string& name);  // "paper"|"standard"
const char* median_rule_name(MedianRule rule);

// Order statistic of `values` selected by `rule`; always one of the inputs.
// Throws std::invalid_argument on empty input.
double median_select(std::span<const double> values,
                     MedianRule rule = MedianRule::paper);

// Treatment-effect predictor: either a column of precomputed predictions
// carried by the dataset, a fitted regression model, or the true-effect
// passthrough used in simulations.
struct BasePredictor {
  enum class Kind { tau_hat_column, linear, boosted_stumps, constant, oracle_tau0 };

  Kind kind = Kind::tau_hat_column;
  LinearModel linear;
  BoostedStumpsModel stumps;
  double constant = 0.0;

  void predict_into(const Dataset& ds, std::span<double> out) const;
  std::vector<double> predict(const Dataset& ds) const;

  static BasePredictor tau_hat_column_ref();
  static BasePredictor oracle_truth();
  static const char* kind_name(Kind k);
  static Kind kind_from_name(const std::string& name);
};

// Calibrated predictor theta(base(w)); monotone in the base prediction.
struct CalibratedPredictor {
  BasePredictor base;
  StepFunction theta;

  void predict_into(const Dataset& ds, std::span<double> out) const;
  std::vector<double> predict(const Dataset& ds) const;
};

// k-member ensemble aggregated pointwise by median_select.
struct CrossCalibratedPredictor {
  std::vector<CalibratedPredictor> members;
  MedianRule rule = MedianRule::paper;

  void predict_into(const Dataset& ds, std::span<double> out) const;
  std::vector<double> predict(const Dataset& ds) const;
};

// Isotonic regression of holdout pseudo-outcomes on holdout base predictions
// (the core calibration step). chi must come from nuisances trained without
// the calibration rows. Throws std::invalid_argument on length mismatch or
// empty input.
StepFunction calibrate_holdout(std::span<const double> tau_on_cal,
                               std::span<const double> chi_on_cal);

// Calibrates a fixed base predictor with cross-fitted nuisances: chi is
// cross-fitted fold by fold, then a single isotonic fit pools all n pairs
// (tau(w_i), chi_i).
CalibratedPredictor calibrate_fixed_crossfit(const BasePredictor& base,
                                             const Dataset& ds,
                                             const FoldAssignment& folds,
                                             const LearnerSpec& pi_spec,
                                             const LearnerSpec& mu_spec,
                                             ClipBounds clip);

// Cross-calibration. Per fold s the training complement E(s) yields nuisance
// models and a base predictor (chi on E(s) from E(s)-trained nuisances,
// regressed on W by base_spec; oracle base uses the tau0 column instead).
// Holdout pseudo-outcomes on fold s then feed the isotonic step: per-fold
// fits (unpooled) or one pooled fit shared by every member (pooled).
CrossCalibratedPredictor cross_calibrate_unpooled(
    const Dataset& ds, const FoldAssignment& folds, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    MedianRule rule = MedianRule::paper);
CrossCalibratedPredictor cross_calibrate_pooled(
    const Dataset& ds, const FoldAssignment& folds, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    MedianRule rule = MedianRule::paper);

// Convenience overloads that draw the folds internally from (n, k, seed).
CrossCalibratedPredictor cross_calibrate_unpooled(
    const Dataset& ds, int k, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    std::uint64_t seed, MedianRule rule = MedianRule::paper);
CrossCalibratedPredictor cross_calibrate_pooled(
    const Dataset& ds, int k, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    std::uint64_t seed, MedianRule rule = MedianRule::paper);

// DR-learner baseline: regresses pooled out-of-fold pseudo-outcomes on W.
// regressor_spec must be linear, boosted_stumps, or constant.
BasePredictor dr_learn(const Dataset& ds, const FoldAssignment& folds,
                       const LearnerSpec& pi_spec, const LearnerSpec& mu_spec,
                       const LearnerSpec& regressor_spec, ClipBounds clip);

// Regression of an arbitrary response on the covariates of ds (the DR-learner
// second stage); exposed for reuse and testing.
BasePredictor regress_on_covariates(const Dataset& ds,
                                    std::span<const double> response,
                                    const LearnerSpec& regressor_spec);

// Persistable calibrator: one or more calibrated members plus the
// aggregation rule.
struct CalibratorModel {
  enum class Kind { holdout, crossfit_fixed, cross_unpooled, cross_pooled };

  Kind kind = Kind::holdout;
  CrossCalibratedPredictor predictor;

  static const char* kind_name(Kind k);
  static Kind kind_from_name(const std::string& name);
};

// JSON persistence; loading reproduces predictions bit-for-bit.
std::string calibrator_to_json(const CalibratorModel& model);
CalibratorModel calibrator_from_json(const std::string& text);

}  // namespace isocal

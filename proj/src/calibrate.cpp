#include "isocal/calibrate.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "isocal/kernels.hpp"
#include "isocal/pseudo.hpp"

namespace isocal {
namespace {

constexpr double kProbClampLo = 1e-6;
constexpr double kProbClampHi = 1.0 - 1e-6;

void check_folds(const Dataset& ds, const FoldAssignment& folds,
                 const char* where) {
  if (folds.fold_of.size() != ds.n) {
    throw std::invalid_argument(std::string(where) +
                                ": fold assignment does not match dataset size");
  }
  if (folds.k < 2) {
    throw std::invalid_argument(std::string(where) + ": need at least 2 folds");
  }
}

// Applies fitted fold-s nuisance models to an arbitrary dataset.
NuisanceFit apply_nuisances(const PropensityModel& pm, const OutcomeModel& om,
                            const Dataset& ds, ClipBounds clip) {
  NuisanceFit nf;
  nf.clip = clip;
  nf.pi_hat.resize(ds.n);
  nf.mu0_hat.resize(ds.n);
  nf.mu1_hat.resize(ds.n);
  pm.predict_into(ds, nf.pi_hat);
  om.predict_into(ds, 0, nf.mu0_hat);
  om.predict_into(ds, 1, nf.mu1_hat);
  kernels::clip(nf.pi_hat, clip.lo, clip.hi);
  return nf;
}

struct FoldArtifacts {
  BasePredictor base;            // trained on E(s)
  std::vector<double> tau_cal;   // base predictions on C(s)
  std::vector<double> chi_cal;   // holdout pseudo-outcomes on C(s)
};

// Shared per-fold pipeline of the cross-calibration algorithms: train
// nuisances and a base predictor on the complement E(s), then score the
// held-out fold C(s).
std::vector<FoldArtifacts> fold_pipeline(const Dataset& ds,
                                         const FoldAssignment& folds,
                                         const LearnerSpec& base_spec,
                                         const LearnerSpec& pi_spec,
                                         const LearnerSpec& mu_spec,
                                         ClipBounds clip) {
  clip.validate();
  base_spec.validate();
  if (base_spec.kind == LearnerKind::logistic) {
    throw std::invalid_argument(
        "base predictor spec must be linear, boosted_stumps, constant, or "
        "oracle");
  }
  if (base_spec.kind == LearnerKind::oracle && !ds.has_tau0()) {
    throw std::invalid_argument("oracle base predictor requires a tau0 column");
  }

  std::vector<FoldArtifacts> parts;
  parts.reserve(static_cast<std::size_t>(folds.k));
  for (int s = 1; s <= folds.k; ++s) {
    const auto cal_rows = folds.rows_in(s);
    if (cal_rows.empty()) {
      throw std::invalid_argument("fold " + std::to_string(s) + " is empty");
    }
    const Dataset train = ds.subset(folds.rows_not_in(s));
    const Dataset cal = ds.subset(cal_rows);
    FoldArtifacts part;
    try {
      const PropensityModel pm = fit_propensity(train, pi_spec);
      const OutcomeModel om = fit_outcome(train, mu_spec);

      if (base_spec.kind == LearnerKind::oracle) {
        part.base = BasePredictor::oracle_truth();
      } else {
        // In-sample pseudo-outcomes on E(s) train the base predictor; only
        // the isotonic step requires held-out pseudo-outcomes.
        const NuisanceFit nf_train = apply_nuisances(pm, om, train, clip);
        const std::vector<double> chi_train = compute_pseudo(train, nf_train);
        part.base = regress_on_covariates(train, chi_train, base_spec);
      }
      const NuisanceFit nf_cal = apply_nuisances(pm, om, cal, clip);
      part.chi_cal = compute_pseudo(cal, nf_cal);
      part.tau_cal = part.base.predict(cal);
    } catch (const std::exception& ex) {
      throw std::runtime_error("fold " + std::to_string(s) + ": " + ex.what());
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

}  // namespace

MedianRule median_rule_from_name(const std::string& name) {
  if (name == "paper") return MedianRule::paper;
  if (name == "standard") return MedianRule::standard;
  throw std::invalid_argument("unknown median rule: " + name);
}

const char* median_rule_name(MedianRule rule) {
  return rule == MedianRule::paper ? "paper" : "standard";
}

double median_select(std::span<const double> values, MedianRule rule) {
  if (values.empty()) {
    throw std::invalid_argument("median_select: empty input");
  }
  const std::size_t k = values.size();
  // 1-based order statistic: floor(k/2) clamped to 1, or ceil(k/2).
  const std::size_t idx =
      rule == MedianRule::paper ? std::max<std::size_t>(1, k / 2) : (k + 1) / 2;
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (idx - 1), sorted.end());
  return sorted[idx - 1];
}

const char* BasePredictor::kind_name(Kind k) {
  switch (k) {
    case Kind::tau_hat_column: return "tau_hat_column";
    case Kind::linear: return "linear";
    case Kind::boosted_stumps: return "boosted_stumps";
    case Kind::constant: return "constant";
    case Kind::oracle_tau0: return "oracle_tau0";
  }
  throw std::invalid_argument("unknown base predictor kind");
}

BasePredictor::Kind BasePredictor::kind_from_name(const std::string& name) {
  if (name == "tau_hat_column") return Kind::tau_hat_column;
  if (name == "linear") return Kind::linear;
  if (name == "boosted_stumps") return Kind::boosted_stumps;
  if (name == "constant") return Kind::constant;
  if (name == "oracle_tau0") return Kind::oracle_tau0;
  throw std::invalid_argument("unknown base predictor kind: " + name);
}

BasePredictor BasePredictor::tau_hat_column_ref() {
  BasePredictor b;
  b.kind = Kind::tau_hat_column;
  return b;
}

BasePredictor BasePredictor::oracle_truth() {
  BasePredictor b;
  b.kind = Kind::oracle_tau0;
  return b;
}

void BasePredictor::predict_into(const Dataset& ds,
                                 std::span<double> out) const {
  if (out.size() != ds.n) {
    throw std::invalid_argument("base predictor: output length mismatch");
  }
  switch (kind) {
    case Kind::tau_hat_column:
      if (!ds.has_tau_hat()) {
        throw std::invalid_argument(
            "base predictor requires a tau_hat column in the dataset");
      }
      std::copy(ds.tau_hat.begin(), ds.tau_hat.end(), out.begin());
      return;
    case Kind::oracle_tau0:
      if (!ds.has_tau0()) {
        throw std::invalid_argument(
            "oracle base predictor requires a tau0 column in the dataset");
      }
      std::copy(ds.tau0.begin(), ds.tau0.end(), out.begin());
      return;
    case Kind::constant:
      std::fill(out.begin(), out.end(), constant);
      return;
    case Kind::linear: {
      const FeatureMatrix fm = FeatureMatrix::from(ds);
      linear.predict_into(fm, out);
      return;
    }
    case Kind::boosted_stumps: {
      const FeatureMatrix fm = FeatureMatrix::from(ds);
      stumps.predict_into(fm, out);
      return;
    }
  }
  throw std::logic_error("unreachable base predictor kind");
}

std::vector<double> BasePredictor::predict(const Dataset& ds) const {
  std::vector<double> out(ds.n);
  predict_into(ds, out);
  return out;
}

void CalibratedPredictor::predict_into(const Dataset& ds,
                                       std::span<double> out) const {
  base.predict_into(ds, out);
  theta.evaluate(out, out);
}

std::vector<double> CalibratedPredictor::predict(const Dataset& ds) const {
  std::vector<double> out(ds.n);
  predict_into(ds, out);
  return out;
}

void CrossCalibratedPredictor::predict_into(const Dataset& ds,
                                            std::span<double> out) const {
  if (members.empty()) {
    throw std::invalid_argument("cross-calibrated predictor has no members");
  }
  if (out.size() != ds.n) {
    throw std::invalid_argument("cross-calibrated predict: length mismatch");
  }
  const std::size_t k = members.size();
  std::vector<std::vector<double>> per_member(k);
  for (std::size_t m = 0; m < k; ++m) {
    per_member[m] = members[m].predict(ds);
  }
  std::vector<double> at_row(k);
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t m = 0; m < k; ++m) at_row[m] = per_member[m][i];
    out[i] = median_select(at_row, rule);
  }
}

std::vector<double> CrossCalibratedPredictor::predict(const Dataset& ds) const {
  std::vector<double> out(ds.n);
  predict_into(ds, out);
  return out;
}

StepFunction calibrate_holdout(std::span<const double> tau_on_cal,
                               std::span<const double> chi_on_cal) {
  if (tau_on_cal.size() != chi_on_cal.size()) {
    throw std::invalid_argument("calibrate_holdout: length mismatch");
  }
  if (tau_on_cal.empty()) {
    throw std::invalid_argument("calibrate_holdout: empty calibration set");
  }
  return pava_fit(tau_on_cal, chi_on_cal);
}

CalibratedPredictor calibrate_fixed_crossfit(const BasePredictor& base,
                                             const Dataset& ds,
                                             const FoldAssignment& folds,
                                             const LearnerSpec& pi_spec,
                                             const LearnerSpec& mu_spec,
                                             ClipBounds clip) {
  check_folds(ds, folds, "calibrate_fixed_crossfit");
  const NuisanceFit nf = cross_fit_nuisances(ds, folds, pi_spec, mu_spec, clip);
  const std::vector<double> chi = compute_pseudo(ds, nf);
  const std::vector<double> tau = base.predict(ds);
  CalibratedPredictor cp;
  cp.base = base;
  cp.theta = pava_fit(tau, chi);
  return cp;
}

CrossCalibratedPredictor cross_calibrate_unpooled(
    const Dataset& ds, const FoldAssignment& folds,
    const LearnerSpec& base_spec, const LearnerSpec& pi_spec,
    const LearnerSpec& mu_spec, ClipBounds clip, MedianRule rule) {
  check_folds(ds, folds, "cross_calibrate_unpooled");
  auto parts = fold_pipeline(ds, folds, base_spec, pi_spec, mu_spec, clip);
  CrossCalibratedPredictor out;
  out.rule = rule;
  out.members.reserve(parts.size());
  for (auto& part : parts) {
    CalibratedPredictor member;
    member.base = std::move(part.base);
    member.theta = pava_fit(part.tau_cal, part.chi_cal);
    out.members.push_back(std::move(member));
  }
  return out;
}

CrossCalibratedPredictor cross_calibrate_pooled(
    const Dataset& ds, const FoldAssignment& folds,
    const LearnerSpec& base_spec, const LearnerSpec& pi_spec,
    const LearnerSpec& mu_spec, ClipBounds clip, MedianRule rule) {
  check_folds(ds, folds, "cross_calibrate_pooled");
  auto parts = fold_pipeline(ds, folds, base_spec, pi_spec, mu_spec, clip);
  // One isotonic fit over all n out-of-fold pairs, fold-major order.
  std::vector<double> tau_pool;
  std::vector<double> chi_pool;
  tau_pool.reserve(ds.n);
  chi_pool.reserve(ds.n);
  for (const auto& part : parts) {
    tau_pool.insert(tau_pool.end(), part.tau_cal.begin(), part.tau_cal.end());
    chi_pool.insert(chi_pool.end(), part.chi_cal.begin(), part.chi_cal.end());
  }
  const StepFunction theta = pava_fit(tau_pool, chi_pool);
  CrossCalibratedPredictor out;
  out.rule = rule;
  out.members.reserve(parts.size());
  for (auto& part : parts) {
    CalibratedPredictor member;
    member.base = std::move(part.base);
    member.theta = theta;
    out.members.push_back(std::move(member));
  }
  return out;
}

CrossCalibratedPredictor cross_calibrate_unpooled(
    const Dataset& ds, int k, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    std::uint64_t seed, MedianRule rule) {
  return cross_calibrate_unpooled(ds, split_folds(ds.n, k, seed), base_spec,
                                  pi_spec, mu_spec, clip, rule);
}

CrossCalibratedPredictor cross_calibrate_pooled(
    const Dataset& ds, int k, const LearnerSpec& base_spec,
    const LearnerSpec& pi_spec, const LearnerSpec& mu_spec, ClipBounds clip,
    std::uint64_t seed, MedianRule rule) {
  return cross_calibrate_pooled(ds, split_folds(ds.n, k, seed), base_spec,
                                pi_spec, mu_spec, clip, rule);
}

BasePredictor regress_on_covariates(const Dataset& ds,
                                    std::span<const double> response,
                                    const LearnerSpec& regressor_spec) {
  if (response.size() != ds.n) {
    throw std::invalid_argument("regress_on_covariates: length mismatch");
  }
  regressor_spec.validate();
  BasePredictor base;
  switch (regressor_spec.kind) {
    case LearnerKind::linear: {
      const FeatureMatrix fm = FeatureMatrix::from(ds);
      base.kind = BasePredictor::Kind::linear;
      base.linear = fit_linear(fm, response, regressor_spec.ridge);
      return base;
    }
    case LearnerKind::boosted_stumps: {
      const FeatureMatrix fm = FeatureMatrix::from(ds);
      base.kind = BasePredictor::Kind::boosted_stumps;
      base.stumps = fit_boosted_stumps(fm, response, regressor_spec);
      return base;
    }
    case LearnerKind::constant_mean:
      base.kind = BasePredictor::Kind::constant;
      base.constant = fit_constant(response).value;
      return base;
    default:
      throw std::invalid_argument(
          "regressor spec must be linear, boosted_stumps, or constant");
  }
}

BasePredictor dr_learn(const Dataset& ds, const FoldAssignment& folds,
                       const LearnerSpec& pi_spec, const LearnerSpec& mu_spec,
                       const LearnerSpec& regressor_spec, ClipBounds clip) {
  check_folds(ds, folds, "dr_learn");
  const NuisanceFit nf = cross_fit_nuisances(ds, folds, pi_spec, mu_spec, clip);
  const std::vector<double> chi = compute_pseudo(ds, nf);
  return regress_on_covariates(ds, chi, regressor_spec);
}

const char* CalibratorModel::kind_name(Kind k) {
  switch (k) {
    case Kind::holdout: return "holdout";
    case Kind::crossfit_fixed: return "crossfit_fixed";
    case Kind::cross_unpooled: return "cross_unpooled";
    case Kind::cross_pooled: return "cross_pooled";
  }
  throw std::invalid_argument("unknown calibrator kind");
}

CalibratorModel::Kind CalibratorModel::kind_from_name(const std::string& name) {
  if (name == "holdout") return Kind::holdout;
  if (name == "crossfit_fixed") return Kind::crossfit_fixed;
  if (name == "cross_unpooled") return Kind::cross_unpooled;
  if (name == "cross_pooled") return Kind::cross_pooled;
  throw std::invalid_argument("unknown calibrator kind: " + name);
}

}  // namespace isocal

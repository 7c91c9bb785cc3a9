#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "isocal/dataset.hpp"

namespace isocal {

enum class LearnerKind { logistic, linear, boosted_stumps, constant_mean, oracle };

// Parses "logistic", "linear", "boosted_stumps", "constant", "oracle";
// throws std::invalid_argument otherwise.
LearnerKind learner_kind_from_name(const std::string& name);
const char* learner_kind_name(LearnerKind kind);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::logistic;
  int rounds = 100;            // boosting rounds M
  double learning_rate = 0.1;  // boosting shrinkage
  double ridge = 1e-3;         // L2 penalty on non-intercept coefficients
  int max_iter = 100;          // Newton iteration cap (logistic)
  double tol = 1e-9;           // per-observation gradient sup-norm tolerance

  // Throws std::invalid_argument when a hyperparameter is out of range.
  void validate() const;
};

// True iff every value is exactly 0.0 or 1.0 (drives the default outcome
// learner choice: logistic for binary y, linear otherwise).
bool outcome_is_binary(std::span<const double> y);

struct FitDiagnostics {
  bool converged = true;
  int iterations = 0;
};

// Column-major copy of a dataset's covariates; column j is covariate j.
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;  // d blocks of length n

  std::span<const double> col(std::size_t j) const {
    return {values.data() + j * n, n};
  }

  static FeatureMatrix from(const Dataset& ds);
};

struct LinearModel {
  std::vector<double> coef;  // coef[0] intercept, coef[1+j] for covariate j

  void predict_into(const FeatureMatrix& x, std::span<double> out) const;
};

struct LogisticModel {
  LinearModel linear;  // linear predictor; probabilities via expit
  FitDiagnostics diag;

  void predict_into(const FeatureMatrix& x, std::span<double> out) const;
};

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;  // value is left where x < threshold, else right
  double left = 0.0;
  double right = 0.0;
};

struct BoostedStumpsModel {
  double initial = 0.0;
  double learning_rate = 1.0;
  std::vector<Stump> stumps;

  void predict_into(const FeatureMatrix& x, std::span<double> out) const;
};

struct ConstantModel {
  double value = 0.0;

  void predict_into(const FeatureMatrix& x, std::span<double> out) const;
};

// Fitting primitives; target must have x.n entries.
LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> target,
                       double ridge);
// Penalized maximum likelihood by Newton iterations with step halving.
// Non-convergence is not an error: the last iterate is returned with
// diag.converged = false.
LogisticModel fit_logistic(const FeatureMatrix& x, std::span<const double> target,
                           const LearnerSpec& spec);
// Least-squares boosting with depth-1 trees. Splits are chosen by an exact SSE
// scan over midpoints of sorted distinct values; ties are broken toward the
// lowest feature index, then the lowest threshold. A round with no valid split
// emits a constant stump (threshold -DBL_MAX, both values the residual mean).
BoostedStumpsModel fit_boosted_stumps(const FeatureMatrix& x,
                                      std::span<const double> target,
                                      const LearnerSpec& spec);
ConstantModel fit_constant(std::span<const double> target);

// Solves the symmetric positive-definite system a*x = b (a row-major p*p, full
// storage) by an unpivoted Cholesky factorization with a fixed operation
// order. Throws std::runtime_error when a pivot is not strictly positive.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                              std::size_t p);

// Propensity model: w -> P(A=1|W=w), always inside (0,1) (regression-kind
// outputs are clamped to [1e-6, 1-1e-6]). The oracle kind reads the pi0
// column of the dataset it predicts on.
struct PropensityModel {
  LearnerKind kind = LearnerKind::logistic;
  std::variant<std::monostate, LogisticModel, LinearModel, BoostedStumpsModel,
               ConstantModel>
      model;
  FitDiagnostics diag;

  void predict_into(const Dataset& ds, std::span<double> out) const;
  std::vector<double> predict(const Dataset& ds) const;
};

// Outcome model: (a, w) -> E[Y|A=a,W=w], one submodel per treatment arm.
struct OutcomeModel {
  using Arm = std::variant<LogisticModel, LinearModel, BoostedStumpsModel,
                           ConstantModel>;

  LearnerKind kind = LearnerKind::linear;
  Arm arm0;
  Arm arm1;
  FitDiagnostics diag;

  void predict_into(const Dataset& ds, int a, std::span<double> out) const;
  std::vector<double> predict(const Dataset& ds, int a) const;
};

// Fits P(A=1|W) on train. Data-driven kinds (logistic, linear, boosted_stumps)
// require both treated and control rows; oracle requires a pi0 column.
PropensityModel fit_propensity(const Dataset& train, const LearnerSpec& spec);

// Fits E[Y|A=a,W] per arm on train. Every kind requires both arms nonempty;
// logistic additionally requires y in {0,1}; the oracle kind is rejected
// because datasets carry no true outcome-regression column.
OutcomeModel fit_outcome(const Dataset& train, const LearnerSpec& spec);

}  // namespace isocal

#include "isocal/learners.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "isocal/kernels.hpp"
#include "isocal/math_core.hpp"

namespace isocal {
namespace {

constexpr double kProbClampLo = 1e-6;
constexpr double kProbClampHi = 1.0 - 1e-6;

// log(1 + exp(x)) on pinned primitives, safe for all finite x.
double softplus(double x) {
  if (x > 36.0) return x;
  if (x < -37.0) return math::exp_pinned(x);
  return math::log_pinned(1.0 + math::exp_pinned(x));
}

void require_size(std::span<const double> target, std::size_t n,
                  const char* where) {
  if (target.size() != n) {
    throw std::invalid_argument(std::string(where) +
                                ": target length does not match row count");
  }
}

// Design-matrix column access with an implicit leading intercept column.
struct Design {
  const FeatureMatrix& x;
  std::vector<double> ones;

  explicit Design(const FeatureMatrix& fm) : x(fm), ones(fm.n, 1.0) {}
  std::size_t p() const { return x.d + 1; }
  std::span<const double> col(std::size_t j) const {
    return j == 0 ? std::span<const double>(ones) : x.col(j - 1);
  }
};

void linear_predictor_into(const FeatureMatrix& x,
                           std::span<const double> coef,
                           std::span<double> out) {
  if (coef.size() != x.d + 1) {
    throw std::invalid_argument("linear model dimension does not match data");
  }
  std::fill(out.begin(), out.end(), coef[0]);
  for (std::size_t j = 0; j < x.d; ++j) {
    kernels::axpy(coef[j + 1], x.col(j), out);
  }
}

double penalized_nll(std::span<const double> eta, std::span<const double> y,
                     std::span<const double> coef, double ridge) {
  double nll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    nll += softplus(eta[i]) - y[i] * eta[i];
  }
  double pen = 0.0;
  for (std::size_t j = 1; j < coef.size(); ++j) pen += coef[j] * coef[j];
  return nll + 0.5 * ridge * pen;
}

}  // namespace

LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "logistic") return LearnerKind::logistic;
  if (name == "linear") return LearnerKind::linear;
  if (name == "boosted_stumps") return LearnerKind::boosted_stumps;
  if (name == "constant") return LearnerKind::constant_mean;
  if (name == "oracle") return LearnerKind::oracle;
  throw std::invalid_argument("unknown learner kind: " + name);
}

const char* learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::logistic: return "logistic";
    case LearnerKind::linear: return "linear";
    case LearnerKind::boosted_stumps: return "boosted_stumps";
    case LearnerKind::constant_mean: return "constant";
    case LearnerKind::oracle: return "oracle";
  }
  throw std::invalid_argument("unknown learner kind");
}

void LearnerSpec::validate() const {
  if (rounds < 1) throw std::invalid_argument("learner spec: rounds must be >= 1");
  if (!(learning_rate > 0.0) || learning_rate > 1.0) {
    throw std::invalid_argument("learner spec: learning_rate must be in (0,1]");
  }
  if (!(ridge >= 0.0)) throw std::invalid_argument("learner spec: ridge must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("learner spec: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("learner spec: tol must be > 0");
}

bool outcome_is_binary(std::span<const double> y) {
  for (double v : y) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return !y.empty();
}

FeatureMatrix FeatureMatrix::from(const Dataset& ds) {
  FeatureMatrix fm;
  fm.n = ds.n;
  fm.d = ds.d;
  fm.values.resize(ds.n * ds.d);
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.d; ++j) {
      fm.values[j * ds.n + i] = ds.covariates[i * ds.d + j];
    }
  }
  return fm;
}

void LinearModel::predict_into(const FeatureMatrix& x,
                               std::span<double> out) const {
  linear_predictor_into(x, coef, out);
}

void LogisticModel::predict_into(const FeatureMatrix& x,
                                 std::span<double> out) const {
  linear_predictor_into(x, linear.coef, out);
  kernels::expit(out, out);
}

void BoostedStumpsModel::predict_into(const FeatureMatrix& x,
                                      std::span<double> out) const {
  std::fill(out.begin(), out.end(), initial);
  for (const Stump& s : stumps) {
    if (s.feature >= x.d) {
      throw std::invalid_argument("stump feature index out of range");
    }
    kernels::stump_apply(x.col(s.feature), s.threshold, s.left, s.right,
                         learning_rate, out);
  }
}

void ConstantModel::predict_into(const FeatureMatrix& x,
                                 std::span<double> out) const {
  (void)x;
  std::fill(out.begin(), out.end(), value);
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                              std::size_t p) {
  if (a.size() != p * p || b.size() != p) {
    throw std::invalid_argument("solve_spd: dimension mismatch");
  }
  // In-place lower Cholesky, row by row, inner sums in index order.
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
      if (i == j) {
        if (!(s > 0.0)) {
          throw std::runtime_error("solve_spd: matrix is not positive definite");
        }
        a[i * p + i] = std::sqrt(s);
      } else {
        a[i * p + j] = s / a[j * p + j];
      }
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * p + k] * b[k];
    b[i] = s / a[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= a[k * p + ii] * b[k];
    b[ii] = s / a[ii * p + ii];
  }
  return b;
}

LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> target,
                       double ridge) {
  require_size(target, x.n, "fit_linear");
  if (x.n == 0) throw std::invalid_argument("fit_linear: empty data");
  if (!(ridge >= 0.0)) throw std::invalid_argument("fit_linear: ridge must be >= 0");
  Design dz(x);
  const std::size_t p = dz.p();
  std::vector<double> a(p * p, 0.0);
  std::vector<double> b(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      double v = kernels::dot(dz.col(j), dz.col(k));
      a[j * p + k] = v;
      a[k * p + j] = v;
    }
    if (j > 0) a[j * p + j] += ridge;
    b[j] = kernels::dot(dz.col(j), target);
  }
  LinearModel m;
  m.coef = solve_spd(std::move(a), std::move(b), p);
  return m;
}

LogisticModel fit_logistic(const FeatureMatrix& x,
                           std::span<const double> target,
                           const LearnerSpec& spec) {
  require_size(target, x.n, "fit_logistic");
  if (x.n == 0) throw std::invalid_argument("fit_logistic: empty data");
  if (!outcome_is_binary(target)) {
    throw std::invalid_argument("fit_logistic: targets must be in {0,1}");
  }
  Design dz(x);
  const std::size_t n = x.n;
  const std::size_t p = dz.p();
  const double gtol = spec.tol * static_cast<double>(n);

  std::vector<double> coef(p, 0.0);
  std::vector<double> eta(n, 0.0);
  std::vector<double> prob(n);
  std::vector<double> resid(n);
  std::vector<double> wgt(n);
  std::vector<double> grad(p);

  auto eval_eta = [&](const std::vector<double>& c) {
    std::fill(eta.begin(), eta.end(), c[0]);
    for (std::size_t j = 1; j < p; ++j) kernels::axpy(c[j], dz.col(j), eta);
  };

  eval_eta(coef);
  double nll = penalized_nll(eta, target, coef, spec.ridge);
  FitDiagnostics diag{false, 0};

  for (int it = 0; it < spec.max_iter; ++it) {
    kernels::expit(eta, prob);
    for (std::size_t i = 0; i < n; ++i) resid[i] = prob[i] - target[i];
    double gmax = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      double g = kernels::dot(dz.col(j), resid);
      if (j > 0) g += spec.ridge * coef[j];
      grad[j] = g;
      gmax = std::max(gmax, std::fabs(g));
    }
    if (gmax <= gtol) {
      diag.converged = true;
      break;
    }
    diag.iterations = it + 1;

    // Newton direction from the ridge-penalized Hessian; the working weights
    // are floored to keep the system positive definite near saturation.
    for (std::size_t i = 0; i < n; ++i) {
      wgt[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
    }
    std::vector<double> hess(p * p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        double v = kernels::dot3(dz.col(j), dz.col(k), wgt);
        hess[j * p + k] = v;
        hess[k * p + j] = v;
      }
      if (j > 0) hess[j * p + j] += spec.ridge;
    }
    std::vector<double> dir = solve_spd(std::move(hess), grad, p);

    double step = 1.0;
    bool accepted = false;
    std::vector<double> cand(p);
    for (int half = 0; half < 40; ++half) {
      for (std::size_t j = 0; j < p; ++j) cand[j] = coef[j] - step * dir[j];
      eval_eta(cand);
      double cand_nll = penalized_nll(eta, target, cand, spec.ridge);
      if (cand_nll <= nll) {
        coef = cand;
        nll = cand_nll;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent available; return the last iterate
  }

  LogisticModel m;
  m.linear.coef = std::move(coef);
  m.diag = diag;
  return m;
}

BoostedStumpsModel fit_boosted_stumps(const FeatureMatrix& x,
                                      std::span<const double> target,
                                      const LearnerSpec& spec) {
  require_size(target, x.n, "fit_boosted_stumps");
  if (x.n == 0) throw std::invalid_argument("fit_boosted_stumps: empty data");
  if (spec.rounds < 1 || !(spec.learning_rate > 0.0) || spec.learning_rate > 1.0) {
    throw std::invalid_argument("fit_boosted_stumps: invalid rounds or learning_rate");
  }
  const std::size_t n = x.n;
  const double dn = static_cast<double>(n);

  BoostedStumpsModel m;
  m.learning_rate = spec.learning_rate;
  m.initial = kernels::sum(target) / dn;
  m.stumps.reserve(static_cast<std::size_t>(spec.rounds));

  std::vector<double> resid(target.begin(), target.end());
  for (double& r : resid) r -= m.initial;

  // Per-feature index order sorted by value, index-stable on ties.
  std::vector<std::vector<std::size_t>> order(x.d);
  for (std::size_t j = 0; j < x.d; ++j) {
    auto cx = x.col(j);
    order[j].resize(n);
    std::iota(order[j].begin(), order[j].end(), std::size_t{0});
    std::sort(order[j].begin(), order[j].end(),
              [&cx](std::size_t a, std::size_t b) {
                if (cx[a] != cx[b]) return cx[a] < cx[b];
                return a < b;
              });
  }

  for (int round = 0; round < spec.rounds; ++round) {
    const double total = kernels::sum(resid);
    bool found = false;
    double best_gain = -DBL_MAX;
    Stump best;
    double best_nl = 0.0;
    double best_suml = 0.0;
    for (std::size_t j = 0; j < x.d; ++j) {
      auto cx = x.col(j);
      const auto& ord = order[j];
      double cum = 0.0;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        cum += resid[ord[t]];
        const double lo = cx[ord[t]];
        const double hi = cx[ord[t + 1]];
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(t + 1);
        const double nr = dn - nl;
        const double sum_r = total - cum;
        const double gain = cum * cum / nl + sum_r * sum_r / nr;
        if (gain > best_gain) {
          double thr = 0.5 * (lo + hi);
          if (!(lo < thr)) thr = hi;  // adjacent doubles: split exactly at hi
          best_gain = gain;
          best = Stump{j, thr, 0.0, 0.0};
          best_nl = nl;
          best_suml = cum;
          found = true;
        }
      }
    }
    if (found) {
      best.left = best_suml / best_nl;
      best.right = (total - best_suml) / (dn - best_nl);
    } else {
      // All features constant: emit a constant stump so that every model has
      // exactly `rounds` stages.
      const double mean_r = total / dn;
      best = Stump{0, -DBL_MAX, mean_r, mean_r};
    }
    kernels::stump_apply(x.col(best.feature), best.threshold, best.left,
                         best.right, -spec.learning_rate, resid);
    m.stumps.push_back(best);
  }
  return m;
}

ConstantModel fit_constant(std::span<const double> target) {
  if (target.empty()) throw std::invalid_argument("fit_constant: empty data");
  return ConstantModel{kernels::sum(target) / static_cast<double>(target.size())};
}

void PropensityModel::predict_into(const Dataset& ds,
                                   std::span<double> out) const {
  if (out.size() != ds.n) {
    throw std::invalid_argument("propensity predict: output length mismatch");
  }
  if (kind == LearnerKind::oracle) {
    if (!ds.has_pi0()) {
      throw std::invalid_argument("oracle propensity requires a pi0 column");
    }
    std::copy(ds.pi0.begin(), ds.pi0.end(), out.begin());
  } else {
    FeatureMatrix fm = FeatureMatrix::from(ds);
    std::visit(
        [&](const auto& mm) {
          if constexpr (std::is_same_v<std::decay_t<decltype(mm)>,
                                       std::monostate>) {
            throw std::logic_error("propensity model is empty");
          } else {
            mm.predict_into(fm, out);
          }
        },
        model);
  }
  kernels::clip(out, kProbClampLo, kProbClampHi);
}

std::vector<double> PropensityModel::predict(const Dataset& ds) const {
  std::vector<double> out(ds.n);
  predict_into(ds, out);
  return out;
}

PropensityModel fit_propensity(const Dataset& train, const LearnerSpec& spec) {
  spec.validate();
  if (train.n == 0) throw std::invalid_argument("fit_propensity: empty data");
  PropensityModel pm;
  pm.kind = spec.kind;

  if (spec.kind == LearnerKind::oracle) {
    if (!train.has_pi0()) {
      throw std::invalid_argument("oracle propensity requires a pi0 column");
    }
    return pm;
  }
  if (spec.kind == LearnerKind::constant_mean) {
    pm.model = fit_constant(train.treatment);
    return pm;
  }

  const double n_treated = kernels::sum(train.treatment);
  if (n_treated == 0.0) {
    throw std::invalid_argument("fit_propensity: all-control training data");
  }
  if (n_treated == static_cast<double>(train.n)) {
    throw std::invalid_argument("fit_propensity: all-treated training data");
  }
  FeatureMatrix fm = FeatureMatrix::from(train);
  switch (spec.kind) {
    case LearnerKind::logistic: {
      LogisticModel lm = fit_logistic(fm, train.treatment, spec);
      pm.diag = lm.diag;
      pm.model = std::move(lm);
      break;
    }
    case LearnerKind::linear:
      pm.model = fit_linear(fm, train.treatment, spec.ridge);
      break;
    case LearnerKind::boosted_stumps:
      pm.model = fit_boosted_stumps(fm, train.treatment, spec);
      break;
    default:
      throw std::logic_error("unreachable propensity kind");
  }
  return pm;
}

void OutcomeModel::predict_into(const Dataset& ds, int a,
                                std::span<double> out) const {
  if (a != 0 && a != 1) {
    throw std::invalid_argument("outcome predict: arm must be 0 or 1");
  }
  if (out.size() != ds.n) {
    throw std::invalid_argument("outcome predict: output length mismatch");
  }
  FeatureMatrix fm = FeatureMatrix::from(ds);
  const Arm& arm = (a == 1) ? arm1 : arm0;
  std::visit([&](const auto& mm) { mm.predict_into(fm, out); }, arm);
}

std::vector<double> OutcomeModel::predict(const Dataset& ds, int a) const {
  std::vector<double> out(ds.n);
  predict_into(ds, a, out);
  return out;
}

OutcomeModel fit_outcome(const Dataset& train, const LearnerSpec& spec) {
  spec.validate();
  if (train.n == 0) throw std::invalid_argument("fit_outcome: empty data");
  if (spec.kind == LearnerKind::oracle) {
    throw std::invalid_argument(
        "oracle outcome learner is not available: datasets carry no true "
        "outcome-regression columns");
  }
  std::vector<std::size_t> rows0;
  std::vector<std::size_t> rows1;
  for (std::size_t i = 0; i < train.n; ++i) {
    (train.treatment[i] == 1.0 ? rows1 : rows0).push_back(i);
  }
  if (rows0.empty() || rows1.empty()) {
    throw std::invalid_argument(std::string("fit_outcome: no ") +
                                (rows0.empty() ? "control" : "treated") +
                                " rows to fit that arm");
  }
  if (spec.kind == LearnerKind::logistic &&
      !outcome_is_binary(train.outcome)) {
    throw std::invalid_argument(
        "fit_outcome: logistic requires y values in {0,1}");
  }

  OutcomeModel om;
  om.kind = spec.kind;
  auto fit_arm = [&](const std::vector<std::size_t>& rows) -> OutcomeModel::Arm {
    Dataset sub = train.subset(rows);
    FeatureMatrix fm = FeatureMatrix::from(sub);
    switch (spec.kind) {
      case LearnerKind::logistic: {
        LogisticModel lm = fit_logistic(fm, sub.outcome, spec);
        om.diag.converged = om.diag.converged && lm.diag.converged;
        om.diag.iterations = std::max(om.diag.iterations, lm.diag.iterations);
        return lm;
      }
      case LearnerKind::linear:
        return fit_linear(fm, sub.outcome, spec.ridge);
      case LearnerKind::boosted_stumps:
        return fit_boosted_stumps(fm, sub.outcome, spec);
      case LearnerKind::constant_mean:
        return fit_constant(sub.outcome);
      default:
        throw std::logic_error("unreachable outcome kind");
    }
  };
  om.arm0 = fit_arm(rows0);
  om.arm1 = fit_arm(rows1);
  return om;
}

}  // namespace isocal

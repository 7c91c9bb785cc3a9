#include "isocal/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "isocal/splits.hpp"

namespace isocal {
namespace {

// Stream ids hung off each replicate's child seed. Stream 0 of the master
// seed is reserved for the shared standardizer draw.
enum : std::uint64_t {
  kStreamTrain = 1,
  kStreamEval = 2,
  kStreamGammaSample = 3,
  kStreamFolds = 4,
  kStreamGammaCvUncal = 5,
  kStreamGammaCvCal = 6,
};

struct ReplicateOutput {
  CalibrationReportRow uncal;
  CalibrationReportRow cal;
};

ReplicateOutput run_one(const SimConfig& cfg, std::uint64_t replicate,
                        double standardizer) {
  const std::uint64_t seed_r =
      rng::derive_stream_seed(cfg.master_seed, replicate);

  rng::Xoshiro256pp train_rng(rng::derive_stream_seed(seed_r, kStreamTrain));
  const Dataset train = generate(cfg.scenario, cfg.n, train_rng);
  rng::Xoshiro256pp eval_rng(rng::derive_stream_seed(seed_r, kStreamEval));
  const Dataset eval = generate(cfg.scenario, cfg.eval_n, eval_rng);
  rng::Xoshiro256pp gamma_rng(
      rng::derive_stream_seed(seed_r, kStreamGammaSample));
  const Dataset gamma_ds = generate(cfg.scenario, cfg.eval_n, gamma_rng);

  const FoldAssignment folds =
      split_folds(cfg.n, cfg.k, rng::derive_stream_seed(seed_r, kStreamFolds));

  const BasePredictor uncal =
      dr_learn(train, folds, cfg.pi_spec, cfg.mu_spec, cfg.base_spec, cfg.clip);
  const CrossCalibratedPredictor cal =
      cross_calibrate_pooled(train, folds, cfg.base_spec, cfg.pi_spec,
                             cfg.mu_spec, cfg.clip, cfg.rule);

  ReplicateOutput out;
  const auto evaluate_one = [&](auto& predictor, std::uint64_t cv_stream) {
    const std::vector<double> gamma_preds = predictor.predict(gamma_ds);
    const GammaModel gamma =
        estimate_gamma0(gamma_preds, gamma_ds.tau0, cfg.gamma,
                        rng::derive_stream_seed(seed_r, cv_stream));
    const std::vector<double> preds = predictor.predict(eval);
    CalibrationReportRow row;
    row.estimator = "dr_learner";
    row.n = cfg.n;
    row.replicate = replicate;
    row.cal = cal_hat(preds, eval.tau0, gamma);
    row.mse = mse_hat(preds, eval.tau0);
    row.dis = dis_hat(row.mse, row.cal);
    row.bias_lower = bin_bias(preds, gamma, Decile::lower);
    row.bias_upper = bin_bias(preds, gamma, Decile::upper);
    row.standardizer = standardizer;
    row.seed = seed_r;
    return row;
  };

  out.uncal = evaluate_one(uncal, kStreamGammaCvUncal);
  out.uncal.calibrated = false;
  out.cal = evaluate_one(cal, kStreamGammaCvCal);
  out.cal.calibrated = true;
  return out;
}

}  // namespace

void SimConfig::validate() const {
  scenario.validate();
  if (k < 2) throw std::invalid_argument("sim config: k must be >= 2");
  if (n < 4 * static_cast<std::size_t>(k)) {
    throw std::invalid_argument("sim config: n must be >= 4k");
  }
  if (reps < 1) throw std::invalid_argument("sim config: reps must be >= 1");
  if (eval_n < 1000) {
    throw std::invalid_argument("sim config: eval_n must be >= 1000");
  }
  base_spec.validate();
  pi_spec.validate();
  mu_spec.validate();
  gamma.validate();
  clip.validate();
  if (base_spec.kind == LearnerKind::logistic ||
      base_spec.kind == LearnerKind::oracle) {
    throw std::invalid_argument(
        "sim config: base learner must be linear, boosted_stumps, or "
        "constant");
  }
}

std::vector<CalibrationReportRow> run_replicates(const SimConfig& cfg,
                                                 int jobs) {
  cfg.validate();
  if (jobs < 1) throw std::invalid_argument("run_replicates: jobs must be >= 1");

  const std::size_t n_mc = std::max<std::size_t>(10000, cfg.eval_n);
  const double standardizer = ite_variance(
      cfg.scenario, n_mc, rng::derive_stream_seed(cfg.master_seed, 0));

  const int reps = cfg.reps;
  std::vector<CalibrationReportRow> rows(2 * static_cast<std::size_t>(reps));
  std::atomic<int> next{1};
  std::mutex err_mutex;
  std::string first_error;

  const auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r > reps) return;
      try {
        ReplicateOutput out =
            run_one(cfg, static_cast<std::uint64_t>(r), standardizer);
        rows[2 * static_cast<std::size_t>(r - 1)] = std::move(out.uncal);
        rows[2 * static_cast<std::size_t>(r - 1) + 1] = std::move(out.cal);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty()) {
          first_error =
              "replicate " + std::to_string(r) + ": " + e.what();
        }
        return;
      }
    }
  };

  const int threads = std::min(jobs, reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return rows;
}

}  // namespace isocal

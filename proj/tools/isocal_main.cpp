// isocal: command-line front end for isotonic calibration of
// treatment-effect predictors. Subcommands: gen-data, calibrate,
// cross-calibrate, simulate, evaluate. Every randomized step takes an
// explicit --seed; reruns with identical flags produce identical bytes.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "isocal/calibrate.hpp"
#include "isocal/cross_fit.hpp"
#include "isocal/csv.hpp"
#include "isocal/io_util.hpp"
#include "isocal/metrics.hpp"
#include "isocal/pseudo.hpp"
#include "isocal/rng.hpp"
#include "isocal/scenario.hpp"
#include "isocal/simulate.hpp"
#include "isocal/splits.hpp"

namespace {

using isocal::BasePredictor;
using isocal::CalibratedPredictor;
using isocal::CalibrationReportRow;
using isocal::CalibratorModel;
using isocal::ClipBounds;
using isocal::CrossCalibratedPredictor;
using isocal::Dataset;
using isocal::FoldAssignment;
using isocal::GammaModel;
using isocal::LearnerSpec;
using isocal::MedianRule;
using isocal::Scenario;
using isocal::SimConfig;
using isocal::StepFunction;

// Removes every registered output unless the command commits, so failures
// never leave partial results behind.
struct OutputGuard {
  std::vector<std::string> paths;
  bool committed = false;

  void add(std::string p) { paths.push_back(std::move(p)); }
  ~OutputGuard() {
    if (committed) return;
    for (const std::string& p : paths) std::remove(p.c_str());
  }
};

struct LearnerOpts {
  std::string pi = "logistic";
  std::string mu = "linear";
  std::string base = "linear";
  int boost_rounds = 100;
  double boost_rate = 0.1;
  double ridge = 1e-3;
};

const std::vector<std::string> kLearnerNames{"logistic", "linear",
                                             "boosted_stumps", "constant",
                                             "oracle"};

void add_learner_flags(CLI::App* cmd, LearnerOpts& o, bool with_base) {
  cmd->add_option("--pi-learner", o.pi, "propensity learner")
      ->check(CLI::IsMember(kLearnerNames))
      ->capture_default_str();
  cmd->add_option("--mu-learner", o.mu, "outcome learner")
      ->check(CLI::IsMember(kLearnerNames))
      ->capture_default_str();
  if (with_base) {
    cmd->add_option("--base-learner", o.base, "base effect learner")
        ->check(CLI::IsMember(kLearnerNames))
        ->capture_default_str();
  }
  cmd->add_option("--boost-rounds", o.boost_rounds, "boosting rounds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--boost-rate", o.boost_rate, "boosting learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--ridge", o.ridge, "ridge penalty for linear/logistic fits")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

LearnerSpec spec_of(const std::string& name, const LearnerOpts& o) {
  LearnerSpec s;
  s.kind = isocal::learner_kind_from_name(name);
  s.rounds = o.boost_rounds;
  s.learning_rate = o.boost_rate;
  s.ridge = o.ridge;
  s.validate();
  return s;
}

CLI::Option* add_clip_flag(CLI::App* cmd, std::vector<double>& clip) {
  return cmd->add_option("--clip", clip, "propensity clip bounds lo,hi")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
}

ClipBounds clip_of(const std::vector<double>& v) {
  if (v.size() != 2) {
    throw std::invalid_argument("--clip needs exactly two values lo,hi");
  }
  ClipBounds cb{v[0], v[1]};
  cb.validate();
  return cb;
}

CLI::Option* add_median_flag(CLI::App* cmd, std::string& rule) {
  return cmd
      ->add_option("--median-rule", rule,
                   "ensemble median index rule (paper|standard)")
      ->check(CLI::IsMember({"paper", "standard"}))
      ->capture_default_str();
}

CLI::Option* add_jobs_flag(CLI::App* cmd, int& jobs) {
  return cmd
      ->add_option("--jobs", jobs,
                   "worker threads (outputs are identical for any value)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// Fold source shared by calibrate and cross-calibrate: an explicit fold
// column wins; otherwise folds are drawn from --seed.
FoldAssignment folds_for(const Dataset& ds, int k, bool seed_given,
                         std::uint64_t seed, const std::string& cmd) {
  if (ds.has_fold()) return isocal::folds_from_column(ds.fold);
  if (!seed_given) {
    throw std::invalid_argument(
        cmd + ": --seed is required to draw folds (no fold column present)");
  }
  return isocal::split_folds(ds.n, k, seed);
}

void require_tau_hat(const Dataset& ds, const std::string& path) {
  if (!ds.has_tau_hat()) {
    throw std::invalid_argument(path + " is missing column tau_hat");
  }
}

struct GenOpts {
  int scenario_id = 1;
  std::size_t d_total = 100;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void setup_gen_data(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "gen-data", "draw a synthetic dataset with tau0/pi0 oracle columns");
  auto opts = std::make_shared<GenOpts>();
  cmd->add_option("--scenario", opts->scenario_id, "scenario id (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--d-total", opts->d_total,
                  "scenario 2 covariate count (>= 20)")
      ->capture_default_str();
  cmd->add_option("--n", opts->n, "rows to draw")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts->seed, "generator seed")->required();
  cmd->add_option("--out", opts->out, "output CSV path")->required();
  cmd->callback([opts]() {
    const Scenario sc{opts->scenario_id, opts->d_total};
    sc.validate();
    isocal::rng::Xoshiro256pp gen(opts->seed);
    const Dataset ds = isocal::generate(sc, opts->n, gen);
    OutputGuard guard;
    isocal::save_csv(opts->out, ds);
    guard.add(opts->out);
    guard.committed = true;
  });
}

struct CalibrateOpts {
  std::string train_path;
  std::string cal_path;
  std::string data_path;
  std::string out_csv;
  std::string out_model;
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> clip{0.01, 0.99};
  std::string rule = "paper";
  int jobs = 1;
  LearnerOpts learners;
};

void setup_calibrate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "calibrate",
      "isotonic-calibrate a tau_hat column (holdout or cross-fitted)");
  auto opts = std::make_shared<CalibrateOpts>();
  cmd->add_option("--train", opts->train_path,
                  "nuisance training CSV (holdout mode)");
  cmd->add_option("--cal", opts->cal_path,
                  "calibration CSV with tau_hat (holdout mode)");
  cmd->add_option("--data", opts->data_path,
                  "single CSV with tau_hat (cross-fitted mode)");
  cmd->add_option("--folds", opts->folds, "fold count for cross-fitting")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  auto* seed_opt =
      cmd->add_option("--seed", opts->seed, "fold-draw seed (cross-fitted mode)");
  cmd->add_option("--out", opts->out_csv, "scored CSV output (adds tau_cal)")
      ->required();
  cmd->add_option("--out-model", opts->out_model, "calibrator JSON output")
      ->required();
  add_clip_flag(cmd, opts->clip);
  add_median_flag(cmd, opts->rule);
  add_jobs_flag(cmd, opts->jobs);
  add_learner_flags(cmd, opts->learners, /*with_base=*/false);
  cmd->callback([opts, seed_opt]() {
    const bool holdout = !opts->train_path.empty() || !opts->cal_path.empty();
    const bool crossfit = !opts->data_path.empty();
    if (holdout == crossfit) {
      throw std::invalid_argument(
          "calibrate: use either --train/--cal or --data");
    }
    if (holdout && (opts->train_path.empty() || opts->cal_path.empty())) {
      throw std::invalid_argument(
          "calibrate: holdout mode needs both --train and --cal");
    }
    const ClipBounds cb = clip_of(opts->clip);
    const MedianRule mr = isocal::median_rule_from_name(opts->rule);
    const LearnerSpec pi = spec_of(opts->learners.pi, opts->learners);
    const LearnerSpec mu = spec_of(opts->learners.mu, opts->learners);

    CalibratorModel model;
    Dataset scored;
    if (holdout) {
      const Dataset train = isocal::load_csv(opts->train_path);
      Dataset cal_ds = isocal::load_csv(opts->cal_path);
      require_tau_hat(cal_ds, opts->cal_path);
      const isocal::NuisanceFit nf =
          isocal::fit_nuisances_split(train, cal_ds, pi, mu, cb);
      const std::vector<double> chi = isocal::compute_pseudo(cal_ds, nf);
      const StepFunction theta =
          isocal::calibrate_holdout(cal_ds.tau_hat, chi);
      model.kind = CalibratorModel::Kind::holdout;
      model.predictor.members = {
          CalibratedPredictor{BasePredictor::tau_hat_column_ref(), theta}};
      scored = std::move(cal_ds);
    } else {
      Dataset ds = isocal::load_csv(opts->data_path);
      require_tau_hat(ds, opts->data_path);
      const FoldAssignment fa = folds_for(ds, opts->folds,
                                          seed_opt->count() > 0, opts->seed,
                                          "calibrate");
      const CalibratedPredictor cp = isocal::calibrate_fixed_crossfit(
          BasePredictor::tau_hat_column_ref(), ds, fa, pi, mu, cb);
      model.kind = CalibratorModel::Kind::crossfit_fixed;
      model.predictor.members = {cp};
      scored = std::move(ds);
    }
    model.predictor.rule = mr;
    const std::vector<double> tau_cal = model.predictor.predict(scored);

    OutputGuard guard;
    isocal::write_file_atomic(opts->out_model,
                              isocal::calibrator_to_json(model));
    guard.add(opts->out_model);
    isocal::save_csv(opts->out_csv, scored, "tau_cal", tau_cal);
    guard.add(opts->out_csv);
    guard.committed = true;
  });
}

struct CrossCalOpts {
  std::string data_path;
  std::string variant = "pooled";
  std::string score_path;
  std::string score_out;
  std::string model_in;
  std::string out_model;
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> clip{0.01, 0.99};
  std::string rule = "paper";
  int jobs = 1;
  LearnerOpts learners;
};

void setup_cross_calibrate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "cross-calibrate",
      "fit a k-member cross-calibrated effect predictor from (w, a, y)");
  auto opts = std::make_shared<CrossCalOpts>();
  cmd->add_option("--data", opts->data_path, "training CSV (w, a, y)");
  cmd->add_option("--variant", opts->variant,
                  "pooled: one shared isotonic fit; unpooled: one per fold")
      ->check(CLI::IsMember({"pooled", "unpooled"}))
      ->capture_default_str();
  cmd->add_option("--folds", opts->folds, "fold count")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  auto* seed_opt = cmd->add_option("--seed", opts->seed, "fold-draw seed");
  cmd->add_option("--score", opts->score_path,
                  "optional CSV to score with the calibrator");
  cmd->add_option("--score-out", opts->score_out,
                  "scored CSV output (adds tau_cal)");
  cmd->add_option("--model-in", opts->model_in,
                  "load a saved calibrator JSON instead of fitting");
  cmd->add_option("--out-model", opts->out_model, "calibrator JSON output");
  add_clip_flag(cmd, opts->clip);
  add_median_flag(cmd, opts->rule);
  add_jobs_flag(cmd, opts->jobs);
  add_learner_flags(cmd, opts->learners, /*with_base=*/true);
  cmd->callback([opts, seed_opt]() {
    OutputGuard guard;
    CalibratorModel model;
    if (!opts->model_in.empty()) {
      if (!opts->data_path.empty()) {
        throw std::invalid_argument(
            "cross-calibrate: --model-in excludes --data");
      }
      if (opts->score_path.empty()) {
        throw std::invalid_argument(
            "cross-calibrate: --model-in needs --score");
      }
      model = isocal::calibrator_from_json(isocal::read_file(opts->model_in));
    } else {
      if (opts->data_path.empty()) {
        throw std::invalid_argument(
            "cross-calibrate: need --data (or --model-in)");
      }
      if (opts->out_model.empty()) {
        throw std::invalid_argument("cross-calibrate: need --out-model");
      }
      const ClipBounds cb = clip_of(opts->clip);
      const MedianRule mr = isocal::median_rule_from_name(opts->rule);
      const LearnerSpec base = spec_of(opts->learners.base, opts->learners);
      const LearnerSpec pi = spec_of(opts->learners.pi, opts->learners);
      const LearnerSpec mu = spec_of(opts->learners.mu, opts->learners);
      const Dataset ds = isocal::load_csv(opts->data_path);
      const FoldAssignment fa = folds_for(ds, opts->folds,
                                          seed_opt->count() > 0, opts->seed,
                                          "cross-calibrate");
      CrossCalibratedPredictor pred =
          opts->variant == "pooled"
              ? isocal::cross_calibrate_pooled(ds, fa, base, pi, mu, cb, mr)
              : isocal::cross_calibrate_unpooled(ds, fa, base, pi, mu, cb, mr);
      model.kind = opts->variant == "pooled"
                       ? CalibratorModel::Kind::cross_pooled
                       : CalibratorModel::Kind::cross_unpooled;
      model.predictor = std::move(pred);
      isocal::write_file_atomic(opts->out_model,
                                isocal::calibrator_to_json(model));
      guard.add(opts->out_model);
    }
    if (!opts->score_path.empty()) {
      if (opts->score_out.empty()) {
        throw std::invalid_argument("cross-calibrate: --score needs --score-out");
      }
      const Dataset s = isocal::load_csv(opts->score_path,
                                         /*allow_extra_columns=*/true);
      const std::vector<double> tau_cal = model.predictor.predict(s);
      isocal::save_csv(opts->score_out, s, "tau_cal", tau_cal);
      guard.add(opts->score_out);
    }
    guard.committed = true;
  });
}

struct SimulateOpts {
  int scenario_id = 1;
  std::size_t d_total = 100;
  std::size_t n = 1000;
  int reps = 1;
  int folds = 5;
  std::uint64_t seed = 0;
  std::size_t eval_n = 10000;
  std::vector<double> clip{0.01, 0.99};
  std::string rule = "paper";
  int jobs = 1;
  std::string out;
  LearnerOpts learners;
};

void setup_simulate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "simulate",
      "run replicated scenario studies and report calibration metrics");
  auto opts = std::make_shared<SimulateOpts>();
  cmd->add_option("--scenario", opts->scenario_id, "scenario id (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--d-total", opts->d_total,
                  "scenario 2 covariate count (>= 20)")
      ->capture_default_str();
  cmd->add_option("--n", opts->n, "training sample size per replicate")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--reps", opts->reps, "replicate count")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--folds", opts->folds, "fold count")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "master seed")->required();
  cmd->add_option("--eval-n", opts->eval_n, "evaluation sample size")
      ->check(CLI::Range(std::size_t{1000},
                         std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  cmd->add_option("--out", opts->out, "report CSV output")->required();
  add_clip_flag(cmd, opts->clip);
  add_median_flag(cmd, opts->rule);
  add_jobs_flag(cmd, opts->jobs);
  add_learner_flags(cmd, opts->learners, /*with_base=*/true);
  cmd->callback([opts]() {
    SimConfig cfg;
    cfg.scenario = Scenario{opts->scenario_id, opts->d_total};
    cfg.n = opts->n;
    cfg.reps = opts->reps;
    cfg.k = opts->folds;
    cfg.master_seed = opts->seed;
    cfg.base_spec = spec_of(opts->learners.base, opts->learners);
    cfg.pi_spec = spec_of(opts->learners.pi, opts->learners);
    cfg.mu_spec = spec_of(opts->learners.mu, opts->learners);
    cfg.clip = clip_of(opts->clip);
    cfg.eval_n = opts->eval_n;
    cfg.rule = isocal::median_rule_from_name(opts->rule);
    const std::vector<CalibrationReportRow> rows =
        isocal::run_replicates(cfg, opts->jobs);
    OutputGuard guard;
    isocal::write_report_csv(opts->out, rows);
    guard.add(opts->out);
    guard.committed = true;
  });
}

struct EvaluateOpts {
  std::string data_path;
  std::string column = "tau_hat";
  std::string gamma_path;
  std::string out;
  int scenario_id = 1;
  std::size_t d_total = 100;
  std::size_t n_mc = 10000;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void setup_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "evaluate", "compute calibration metrics for a prediction column");
  auto opts = std::make_shared<EvaluateOpts>();
  cmd->add_option("--data", opts->data_path, "CSV with predictions and tau0")
      ->required();
  cmd->add_option("--column", opts->column, "prediction column to evaluate")
      ->check(CLI::IsMember({"tau_hat", "tau_cal"}))
      ->capture_default_str();
  cmd->add_option("--gamma-data", opts->gamma_path,
                  "independent CSV for fitting the binning model (default: "
                  "seeded half split of --data)");
  auto* sc_opt = cmd->add_option("--scenario", opts->scenario_id,
                                 "scenario id for the variance standardizer "
                                 "(omit to report NA)")
                     ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--d-total", opts->d_total,
                  "scenario 2 covariate count (>= 20)")
      ->capture_default_str();
  cmd->add_option("--n-mc", opts->n_mc, "standardizer Monte-Carlo draws")
      ->check(CLI::Range(std::size_t{10000},
                         std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "split and cross-validation seed")
      ->required();
  cmd->add_option("--out", opts->out, "report CSV output")->required();
  add_jobs_flag(cmd, opts->jobs);
  cmd->callback([opts, sc_opt]() {
    const Dataset ds =
        isocal::load_csv(opts->data_path, /*allow_extra_columns=*/true);
    if (!ds.has_tau0()) {
      throw std::invalid_argument(opts->data_path +
                                  " is missing column tau0");
    }
    const auto column_of = [&](const std::string& path,
                               const Dataset& d) -> std::vector<double> {
      if (opts->column == "tau_hat") {
        require_tau_hat(d, path);
        return d.tau_hat;
      }
      return isocal::load_csv_column(path, "tau_cal");
    };
    const std::vector<double> preds = column_of(opts->data_path, ds);

    GammaModel gamma;
    std::vector<double> ev_pred, ev_true;
    if (!opts->gamma_path.empty()) {
      const Dataset g =
          isocal::load_csv(opts->gamma_path, /*allow_extra_columns=*/true);
      if (!g.has_tau0()) {
        throw std::invalid_argument(opts->gamma_path +
                                    " is missing column tau0");
      }
      const std::vector<double> gp = column_of(opts->gamma_path, g);
      gamma = isocal::estimate_gamma0(
          gp, g.tau0, {}, isocal::rng::derive_stream_seed(opts->seed, 2));
      ev_pred = preds;
      ev_true = ds.tau0;
    } else {
      const auto [gamma_rows, eval_rows] = isocal::split_train_cal(
          ds.n, 0.5, isocal::rng::derive_stream_seed(opts->seed, 1));
      std::vector<double> gp, gt;
      for (const std::size_t r : gamma_rows) {
        gp.push_back(preds[r]);
        gt.push_back(ds.tau0[r]);
      }
      for (const std::size_t r : eval_rows) {
        ev_pred.push_back(preds[r]);
        ev_true.push_back(ds.tau0[r]);
      }
      gamma = isocal::estimate_gamma0(
          gp, gt, {}, isocal::rng::derive_stream_seed(opts->seed, 2));
    }

    CalibrationReportRow row;
    row.estimator = opts->column;
    row.calibrated = opts->column == "tau_cal";
    row.n = ev_pred.size();
    row.replicate = 0;
    row.cal = isocal::cal_hat(ev_pred, ev_true, gamma);
    row.mse = isocal::mse_hat(ev_pred, ev_true);
    row.dis = isocal::dis_hat(row.mse, row.cal);
    row.bias_lower = isocal::bin_bias(ev_pred, gamma, isocal::Decile::lower);
    row.bias_upper = isocal::bin_bias(ev_pred, gamma, isocal::Decile::upper);
    if (sc_opt->count() > 0) {
      const Scenario sc{opts->scenario_id, opts->d_total};
      row.standardizer = isocal::ite_variance(
          sc, opts->n_mc, isocal::rng::derive_stream_seed(opts->seed, 3));
    } else {
      row.standardizer = std::numeric_limits<double>::quiet_NaN();
    }
    row.seed = opts->seed;

    OutputGuard guard;
    isocal::write_report_csv(opts->out, std::vector{row});
    guard.add(opts->out);
    guard.committed = true;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "isocal: doubly robust isotonic calibration for heterogeneous "
      "treatment-effect predictors"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file (command-line flags override)");
  setup_gen_data(app);
  setup_calibrate(app);
  setup_cross_calibrate(app);
  setup_simulate(app);
  setup_evaluate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "isocal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

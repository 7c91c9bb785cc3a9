#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "isocal/calibrate.hpp"
#include "isocal/metrics.hpp"
#include "isocal/scenario.hpp"

namespace isocal {

// One simulation run: reps replicates of (generate, fit, evaluate) for a
// single scenario and sample size.
struct SimConfig {
  Scenario scenario;
  std::size_t n = 1000;
  int reps = 1;
  int k = 5;
  std::uint64_t master_seed = 0;
  LearnerSpec base_spec;  // DR-learner second stage and cross-fit base
  LearnerSpec pi_spec;
  LearnerSpec mu_spec;
  GammaHatConfig gamma;
  ClipBounds clip;
  std::size_t eval_n = 10000;
  MedianRule rule = MedianRule::paper;

  // Throws std::invalid_argument: needs n >= 4k, reps >= 1, eval_n >= 10^3,
  // valid scenario and learner specs.
  void validate() const;
};

// Runs the replicates and returns two report rows per replicate (the
// uncalibrated DR-learner and its pooled cross-calibrated version). Each
// replicate draws from its own child stream keyed by (master_seed, r), so
// rows do not depend on execution order or on jobs. Errors propagate as
// std::runtime_error annotated with the replicate id.
std::vector<CalibrationReportRow> run_replicates(const SimConfig& cfg,
                                                 int jobs = 1);

}  // namespace isocal

#pragma once

#include <vector>

#include "isocal/dataset.hpp"
#include "isocal/learners.hpp"
#include "isocal/splits.hpp"

namespace isocal {

// Propensity clipping bounds, applied to every stored pi_hat.
struct ClipBounds {
  double lo = 0.01;
  double hi = 0.99;

  // Throws std::invalid_argument unless 0 < lo < hi < 1.
  void validate() const;
};

// Per-observation nuisance estimates aligned with a dataset.
struct NuisanceFit {
  std::vector<double> pi_hat;   // in [clip.lo, clip.hi]
  std::vector<double> mu0_hat;  // unclipped
  std::vector<double> mu1_hat;
  ClipBounds clip;
  bool all_converged = true;
};

// Trains pi/mu models on `train` and scores `eval` (holdout-style nuisances).
NuisanceFit fit_nuisances_split(const Dataset& train, const Dataset& eval,
                                const LearnerSpec& pi_spec,
                                const LearnerSpec& mu_spec, ClipBounds clip);

// K-fold cross-fitting: rows of fold s are scored by models trained on the
// complement of fold s only. Learner errors are rethrown annotated with the
// fold id.
NuisanceFit cross_fit_nuisances(const Dataset& ds, const FoldAssignment& folds,
                                const LearnerSpec& pi_spec,
                                const LearnerSpec& mu_spec, ClipBounds clip);

}  // namespace isocal

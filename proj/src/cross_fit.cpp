#include "isocal/cross_fit.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

#include "isocal/kernels.hpp"

namespace isocal {

void ClipBounds::validate() const {
  if (!(0.0 < lo) || !(lo < hi) || !(hi < 1.0)) {
    throw std::invalid_argument("clip bounds must satisfy 0 < lo < hi < 1");
  }
}

NuisanceFit fit_nuisances_split(const Dataset& train, const Dataset& eval,
                                const LearnerSpec& pi_spec,
                                const LearnerSpec& mu_spec, ClipBounds clip) {
  clip.validate();
  PropensityModel pm = fit_propensity(train, pi_spec);
  OutcomeModel om = fit_outcome(train, mu_spec);

  NuisanceFit nf;
  nf.clip = clip;
  nf.pi_hat.resize(eval.n);
  nf.mu0_hat.resize(eval.n);
  nf.mu1_hat.resize(eval.n);
  pm.predict_into(eval, nf.pi_hat);
  om.predict_into(eval, 0, nf.mu0_hat);
  om.predict_into(eval, 1, nf.mu1_hat);
  kernels::clip(nf.pi_hat, clip.lo, clip.hi);
  nf.all_converged = pm.diag.converged && om.diag.converged;
  return nf;
}

NuisanceFit cross_fit_nuisances(const Dataset& ds, const FoldAssignment& folds,
                                const LearnerSpec& pi_spec,
                                const LearnerSpec& mu_spec, ClipBounds clip) {
  clip.validate();
  if (folds.fold_of.size() != ds.n) {
    throw std::invalid_argument(
        "cross_fit_nuisances: fold assignment does not match dataset size");
  }
  if (folds.k < 2) {
    throw std::invalid_argument("cross_fit_nuisances: need at least 2 folds");
  }

  NuisanceFit nf;
  nf.clip = clip;
  nf.pi_hat.resize(ds.n);
  nf.mu0_hat.resize(ds.n);
  nf.mu1_hat.resize(ds.n);

  for (int s = 1; s <= folds.k; ++s) {
    const auto eval_rows = folds.rows_in(s);
    if (eval_rows.empty()) continue;
    const Dataset train = ds.subset(folds.rows_not_in(s));
    const Dataset eval = ds.subset(eval_rows);
    NuisanceFit part;
    try {
      part = fit_nuisances_split(train, eval, pi_spec, mu_spec, clip);
    } catch (const std::exception& ex) {
      throw std::runtime_error("fold " + std::to_string(s) + ": " + ex.what());
    }
    for (std::size_t t = 0; t < eval_rows.size(); ++t) {
      nf.pi_hat[eval_rows[t]] = part.pi_hat[t];
      nf.mu0_hat[eval_rows[t]] = part.mu0_hat[t];
      nf.mu1_hat[eval_rows[t]] = part.mu1_hat[t];
    }
    nf.all_converged = nf.all_converged && part.all_converged;
  }
  return nf;
}

}  // namespace isocal

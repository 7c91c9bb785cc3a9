#include "isocal/pseudo.hpp"

#include <stdexcept>

#include "isocal/kernels.hpp"

namespace isocal {

std::vector<double> compute_pseudo(const Dataset& ds, const NuisanceFit& nf) {
  if (nf.pi_hat.size() != ds.n || nf.mu0_hat.size() != ds.n ||
      nf.mu1_hat.size() != ds.n) {
    throw std::invalid_argument(
        "compute_pseudo: nuisance fit does not match dataset size");
  }
  std::vector<double> chi(ds.n);
  kernels::pseudo_outcome(ds.treatment, ds.outcome, nf.pi_hat, nf.mu0_hat,
                          nf.mu1_hat, chi);
  return chi;
}

}  // namespace isocal

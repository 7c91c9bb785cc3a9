#include "isocal/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isocal {

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = covariates[i * d + j];
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n = rows.size();
  out.d = d;
  out.covariates.reserve(out.n * d);
  out.treatment.reserve(out.n);
  out.outcome.reserve(out.n);
  if (has_tau_hat()) out.tau_hat.reserve(out.n);
  if (has_tau0()) out.tau0.reserve(out.n);
  if (has_pi0()) out.pi0.reserve(out.n);
  if (has_fold()) out.fold.reserve(out.n);
  for (std::size_t i : rows) {
    auto r = row(i);
    out.covariates.insert(out.covariates.end(), r.begin(), r.end());
    out.treatment.push_back(treatment[i]);
    out.outcome.push_back(outcome[i]);
    if (has_tau_hat()) out.tau_hat.push_back(tau_hat[i]);
    if (has_tau0()) out.tau0.push_back(tau0[i]);
    if (has_pi0()) out.pi0.push_back(pi0[i]);
    if (has_fold()) out.fold.push_back(fold[i]);
  }
  return out;
}

void Dataset::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("dataset: " + msg); };
  if (n == 0) fail("empty dataset");
  if (d == 0) fail("no covariates");
  if (covariates.size() != n * d) fail("covariate block size mismatch");
  if (treatment.size() != n) fail("treatment length mismatch");
  if (outcome.size() != n) fail("outcome length mismatch");
  auto check_opt = [&](const std::vector<double>& v, const char* name) {
    if (!v.empty() && v.size() != n) {
      fail(std::string(name) + " length mismatch");
    }
  };
  check_opt(tau_hat, "tau_hat");
  check_opt(tau0, "tau0");
  check_opt(pi0, "pi0");
  if (!fold.empty() && fold.size() != n) fail("fold length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (treatment[i] != 0.0 && treatment[i] != 1.0) {
      fail("treatment not in {0,1} at row " + std::to_string(i + 1));
    }
    if (!std::isfinite(outcome[i])) fail("non-finite outcome at row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(covariates[i * d + j])) {
        fail("non-finite covariate at row " + std::to_string(i + 1));
      }
    }
    if (has_tau_hat() && !std::isfinite(tau_hat[i])) {
      fail("non-finite tau_hat at row " + std::to_string(i + 1));
    }
    if (has_tau0() && !std::isfinite(tau0[i])) {
      fail("non-finite tau0 at row " + std::to_string(i + 1));
    }
    if (has_pi0() && !(pi0[i] > 0.0 && pi0[i] < 1.0)) {
      fail("pi0 outside (0,1) at row " + std::to_string(i + 1));
    }
    if (has_fold() && fold[i] < 1) fail("fold id < 1 at row " + std::to_string(i + 1));
  }
}

}  // namespace isocal

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "isocal/dataset.hpp"

namespace isocal::testsupport {

// Builds a dataset from row-major covariates plus treatment/outcome columns.
inline Dataset make_dataset(std::size_t d, std::vector<double> w,
                            std::vector<double> a, std::vector<double> y) {
  Dataset ds;
  ds.d = d;
  ds.n = a.size();
  if (w.size() != ds.n * d || y.size() != ds.n) {
    throw std::invalid_argument("make_dataset: column sizes disagree");
  }
  ds.covariates = std::move(w);
  ds.treatment = std::move(a);
  ds.outcome = std::move(y);
  return ds;
}

}  // namespace isocal::testsupport

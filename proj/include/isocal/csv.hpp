#pragma once

#include <span>
#include <string>
#include <vector>

#include "isocal/dataset.hpp"

namespace isocal {

// Schema: header mandatory; covariate columns w1..wd (contiguous, from w1);
// required columns a (0/1) and y; optional tau_hat, tau0, pi0, fold (1-based
// ints). Unknown columns are an error unless allow_extra_columns, in which
// case they are ignored. Errors carry the file line and column name.
Dataset load_csv(const std::string& path, bool allow_extra_columns = false);

// Writes the canonical column order: w1..wd, a, y, then whichever of
// tau_hat, tau0, pi0, fold are present. LF line endings, trailing newline.
void save_csv(const std::string& path, const Dataset& ds);

// Same layout with one extra trailing column (e.g. tau_cal).
void save_csv(const std::string& path, const Dataset& ds,
              const std::string& extra_name, std::span<const double> extra);

// Extracts a single numeric column by header name; errors name the column.
std::vector<double> load_csv_column(const std::string& path,
                                    const std::string& name);

}  // namespace isocal

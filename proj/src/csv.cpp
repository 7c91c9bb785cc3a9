#include "isocal/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "isocal/io_util.hpp"

namespace isocal {
namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& msg) {
  throw std::invalid_argument("csv " + path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& path, std::size_t line, const std::string& col,
                    const std::string& field) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto res = std::from_chars(b, e, v, std::chars_format::general);
  if (res.ec != std::errc() || res.ptr != e || field.empty()) {
    fail(path, line, "cannot parse number in column " + col + ": '" + field + "'");
  }
  if (!std::isfinite(v)) {
    fail(path, line, "non-finite value in column " + col);
  }
  return v;
}

int parse_int(const std::string& path, std::size_t line, const std::string& col,
              const std::string& field) {
  int v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || field.empty()) {
    fail(path, line, "cannot parse integer in column " + col + ": '" + field + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, bool allow_extra_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto names = split_line(line);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t col_a = kNone, col_y = kNone, col_tau_hat = kNone, col_tau0 = kNone,
              col_pi0 = kNone, col_fold = kNone;
  std::vector<std::pair<std::size_t, std::size_t>> w_cols;  // (w index 1-based, column)
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string& nm = names[c];
    auto set = [&](std::size_t& slot) {
      if (slot != kNone) fail(path, 1, "duplicate column " + nm);
      slot = c;
    };
    if (nm == "a") {
      set(col_a);
    } else if (nm == "y") {
      set(col_y);
    } else if (nm == "tau_hat") {
      set(col_tau_hat);
    } else if (nm == "tau0") {
      set(col_tau0);
    } else if (nm == "pi0") {
      set(col_pi0);
    } else if (nm == "fold") {
      set(col_fold);
    } else if (nm.size() >= 2 && nm[0] == 'w') {
      std::size_t widx = 0;
      const char* b = nm.data() + 1;
      const char* e = nm.data() + nm.size();
      auto res = std::from_chars(b, e, widx);
      if (res.ec != std::errc() || res.ptr != e || widx == 0) {
        if (!allow_extra_columns) fail(path, 1, "unknown column " + nm);
        continue;
      }
      for (auto& [wi, cc] : w_cols) {
        if (wi == widx) fail(path, 1, "duplicate column " + nm);
      }
      w_cols.emplace_back(widx, c);
    } else {
      if (!allow_extra_columns) fail(path, 1, "unknown column " + nm);
    }
  }
  if (col_a == kNone) fail(path, 1, "missing required column a");
  if (col_y == kNone) fail(path, 1, "missing required column y");
  if (w_cols.empty()) fail(path, 1, "missing covariate columns w1..wd");
  std::sort(w_cols.begin(), w_cols.end());
  for (std::size_t i = 0; i < w_cols.size(); ++i) {
    if (w_cols[i].first != i + 1) {
      fail(path, 1, "covariate columns must be contiguous w1..wd; missing w" +
                        std::to_string(i + 1));
    }
  }

  Dataset ds;
  ds.d = w_cols.size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      fail(path, lineno, "empty line");
    }
    auto fields = split_line(line);
    if (fields.size() != names.size()) {
      fail(path, lineno, "expected " + std::to_string(names.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    for (auto& [wi, c] : w_cols) {
      ds.covariates.push_back(parse_double(path, lineno, names[c], fields[c]));
    }
    double a = parse_double(path, lineno, "a", fields[col_a]);
    if (a != 0.0 && a != 1.0) fail(path, lineno, "treatment a must be 0 or 1");
    ds.treatment.push_back(a);
    ds.outcome.push_back(parse_double(path, lineno, "y", fields[col_y]));
    if (col_tau_hat != kNone) {
      ds.tau_hat.push_back(parse_double(path, lineno, "tau_hat", fields[col_tau_hat]));
    }
    if (col_tau0 != kNone) {
      ds.tau0.push_back(parse_double(path, lineno, "tau0", fields[col_tau0]));
    }
    if (col_pi0 != kNone) {
      double p = parse_double(path, lineno, "pi0", fields[col_pi0]);
      if (!(p > 0.0 && p < 1.0)) fail(path, lineno, "pi0 must lie in (0,1)");
      ds.pi0.push_back(p);
    }
    if (col_fold != kNone) {
      int f = parse_int(path, lineno, "fold", fields[col_fold]);
      if (f < 1) fail(path, lineno, "fold ids are 1-based");
      ds.fold.push_back(f);
    }
    ++ds.n;
  }
  if (ds.n == 0) fail(path, lineno, "no data rows");
  ds.validate();
  return ds;
}

namespace {

std::string render_csv(const Dataset& ds, const std::string* extra_name,
                       std::span<const double> extra) {
  ds.validate();
  if (extra_name && extra.size() != ds.n) {
    throw std::invalid_argument("save_csv: extra column length mismatch");
  }
  std::string out;
  out.reserve(ds.n * (ds.d + 5) * 12);
  for (std::size_t j = 1; j <= ds.d; ++j) {
    out += "w" + std::to_string(j) + ",";
  }
  out += "a,y";
  if (ds.has_tau_hat()) out += ",tau_hat";
  if (ds.has_tau0()) out += ",tau0";
  if (ds.has_pi0()) out += ",pi0";
  if (ds.has_fold()) out += ",fold";
  if (extra_name) out += "," + *extra_name;
  out += "\n";
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.d; ++j) {
      out += format_double(ds.covariates[i * ds.d + j]);
      out += ',';
    }
    out += format_double(ds.treatment[i]);
    out += ',';
    out += format_double(ds.outcome[i]);
    if (ds.has_tau_hat()) {
      out += ',';
      out += format_double(ds.tau_hat[i]);
    }
    if (ds.has_tau0()) {
      out += ',';
      out += format_double(ds.tau0[i]);
    }
    if (ds.has_pi0()) {
      out += ',';
      out += format_double(ds.pi0[i]);
    }
    if (ds.has_fold()) {
      out += ',';
      out += std::to_string(ds.fold[i]);
    }
    if (extra_name) {
      out += ',';
      out += format_double(extra[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

void save_csv(const std::string& path, const Dataset& ds) {
  write_file_atomic(path, render_csv(ds, nullptr, {}));
}

void save_csv(const std::string& path, const Dataset& ds,
              const std::string& extra_name, std::span<const double> extra) {
  write_file_atomic(path, render_csv(ds, &extra_name, extra));
}

std::vector<double> load_csv_column(const std::string& path,
                                    const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto names = split_line(line);
  std::size_t col = names.size();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == name) {
      if (col != names.size()) fail(path, 1, "duplicate column " + name);
      col = c;
    }
  }
  if (col == names.size()) fail(path, 1, "missing column " + name);

  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      fail(path, lineno, "empty line");
    }
    const auto fields = split_line(line);
    if (fields.size() != names.size()) {
      fail(path, lineno, "expected " + std::to_string(names.size()) +
                             " fields, got " + std::to_string(fields.size()));
    }
    out.push_back(parse_double(path, lineno, name, fields[col]));
  }
  if (out.empty()) fail(path, lineno, "no data rows");
  return out;
}

}  // namespace isocal

#pragma once

#include <span>
#include <string>

// Data-parallel kernels with a scalar reference implementation and an AVX2
// variant selected at runtime. All backends are bitwise identical: elementwise
// ops execute the same IEEE sequence per lane, and reductions stripe elements
// over four Neumaier-compensated accumulators (element i -> lane i mod 4) with
// a pinned combine order, so dispatch never changes program output.

namespace isocal::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  // out[i] = 1 / (1 + exp(-in[i]))
  void (*expit)(std::span<const double> in, std::span<double> out);
  // x[i] = min(max(x[i], lo), hi)
  void (*clip)(std::span<double> x, double lo, double hi);
  // y[i] = fma(c, x[i], y[i])
  void (*axpy)(double c, std::span<const double> x, std::span<double> y);
  // y[i] = fma(scale, x[i] < thr ? left : right, y[i])
  void (*stump_apply)(std::span<const double> x, double thr, double left,
                      double right, double scale, std::span<double> y);
  // out[i] = (mu1-mu0) + ((a-pi)/(pi*(1-pi))) * (y - (a==1 ? mu1 : mu0))
  void (*pseudo_outcome)(std::span<const double> a, std::span<const double> y,
                         std::span<const double> pi, std::span<const double> mu0,
                         std::span<const double> mu1, std::span<double> out);
  double (*sum)(std::span<const double> x);
  double (*dot)(std::span<const double> x, std::span<const double> y);
  // sum of x[i]*y[i]*z[i], evaluated as (x*y)*z
  double (*dot3)(std::span<const double> x, std::span<const double> y,
                 std::span<const double> z);
  // sum of (x[i]-y[i])^2
  double (*sq_diff_sum)(std::span<const double> x, std::span<const double> y);
  // sum of w[i]*(x[i]-y[i])^2, evaluated as w*(d*d)
  double (*w_sq_diff_sum)(std::span<const double> w, std::span<const double> x,
                          std::span<const double> y);
  // sum of (t0[i]-t[i])*(g[i]-t[i])
  double (*cal_cross_sum)(std::span<const double> t0, std::span<const double> t,
                          std::span<const double> g);
};

bool backend_supported(Backend b);
const KernelTable& table(Backend b);  // throws std::runtime_error if unsupported
Backend active_backend();             // env ISOCAL_KERNELS={scalar,avx2} overrides
void set_backend(Backend b);          // throws std::runtime_error if unsupported
std::string backend_name(Backend b);

inline void expit(std::span<const double> in, std::span<double> out) {
  table(active_backend()).expit(in, out);
}
inline void clip(std::span<double> x, double lo, double hi) {
  table(active_backend()).clip(x, lo, hi);
}
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  table(active_backend()).axpy(c, x, y);
}
inline void stump_apply(std::span<const double> x, double thr, double left,
                        double right, double scale, std::span<double> y) {
  table(active_backend()).stump_apply(x, thr, left, right, scale, y);
}
inline void pseudo_outcome(std::span<const double> a, std::span<const double> y,
                           std::span<const double> pi, std::span<const double> mu0,
                           std::span<const double> mu1, std::span<double> out) {
  table(active_backend()).pseudo_outcome(a, y, pi, mu0, mu1, out);
}
inline double sum(std::span<const double> x) { return table(active_backend()).sum(x); }
inline double dot(std::span<const double> x, std::span<const double> y) {
  return table(active_backend()).dot(x, y);
}
inline double dot3(std::span<const double> x, std::span<const double> y,
                   std::span<const double> z) {
  return table(active_backend()).dot3(x, y, z);
}
inline double sq_diff_sum(std::span<const double> x, std::span<const double> y) {
  return table(active_backend()).sq_diff_sum(x, y);
}
inline double w_sq_diff_sum(std::span<const double> w, std::span<const double> x,
                            std::span<const double> y) {
  return table(active_backend()).w_sq_diff_sum(w, x, y);
}
inline double cal_cross_sum(std::span<const double> t0, std::span<const double> t,
                            std::span<const double> g) {
  return table(active_backend()).cal_cross_sum(t0, t, g);
}

}  // namespace isocal::kernels

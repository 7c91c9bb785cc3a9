#include <cmath>
#include <cstddef>

#include "isocal/kernels.hpp"
#include "isocal/math_core.hpp"

// Scalar reference backend. The AVX2 backend mirrors these op sequences
// exactly; any change here must be replicated there to keep bit equality.

namespace isocal::kernels {
namespace {

struct Acc4 {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  double c[4] = {0.0, 0.0, 0.0, 0.0};

  void add(std::size_t lane, double v) {
    double t = s[lane] + v;
    if (std::fabs(s[lane]) >= std::fabs(v)) {
      c[lane] += (s[lane] - t) + v;
    } else {
      c[lane] += (v - t) + s[lane];
    }
    s[lane] = t;
  }

  // Folds lanes and compensations through one more Neumaier pass so that
  // cross-lane cancellation is also compensated. Order is pinned; the AVX2
  // backend runs this exact code on its stored lanes.
  double combine() const {
    double total = 0.0;
    double comp = 0.0;
    auto nadd = [&](double v) {
      double t = total + v;
      if (std::fabs(total) >= std::fabs(v)) {
        comp += (total - t) + v;
      } else {
        comp += (v - t) + total;
      }
      total = t;
    };
    for (int j = 0; j < 4; ++j) nadd(s[j]);
    for (int j = 0; j < 4; ++j) nadd(c[j]);
    return total + comp;
  }
};

template <class Value>
double reduce_striped(std::size_t n, Value&& value) {
  Acc4 acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(i & 3, value(i));
  return acc.combine();
}

void k_expit(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = math::expit_pinned(in[i]);
}

void k_clip(std::span<double> x, double lo, double hi) {
  for (double& v : x) {
    v = (v > lo) ? v : lo;
    v = (v < hi) ? v : hi;
  }
}

void k_axpy(double c, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::fma(c, x[i], y[i]);
}

void k_stump_apply(std::span<const double> x, double thr, double left,
                   double right, double scale, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sel = (x[i] < thr) ? left : right;
    y[i] = std::fma(scale, sel, y[i]);
  }
}

void k_pseudo_outcome(std::span<const double> a, std::span<const double> y,
                      std::span<const double> pi, std::span<const double> mu0,
                      std::span<const double> mu1, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    double mu_sel = (a[i] == 1.0) ? mu1[i] : mu0[i];
    double num = a[i] - pi[i];
    double den = pi[i] * (1.0 - pi[i]);
    double resid = y[i] - mu_sel;
    out[i] = (mu1[i] - mu0[i]) + (num / den) * resid;
  }
}

double k_sum(std::span<const double> x) {
  return reduce_striped(x.size(), [&](std::size_t i) { return x[i]; });
}

double k_dot(std::span<const double> x, std::span<const double> y) {
  return reduce_striped(x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

double k_dot3(std::span<const double> x, std::span<const double> y,
              std::span<const double> z) {
  return reduce_striped(x.size(), [&](std::size_t i) { return (x[i] * y[i]) * z[i]; });
}

double k_sq_diff_sum(std::span<const double> x, std::span<const double> y) {
  return reduce_striped(x.size(), [&](std::size_t i) {
    double d = x[i] - y[i];
    return d * d;
  });
}

double k_w_sq_diff_sum(std::span<const double> w, std::span<const double> x,
                       std::span<const double> y) {
  return reduce_striped(x.size(), [&](std::size_t i) {
    double d = x[i] - y[i];
    return w[i] * (d * d);
  });
}

double k_cal_cross_sum(std::span<const double> t0, std::span<const double> t,
                       std::span<const double> g) {
  return reduce_striped(t0.size(), [&](std::size_t i) {
    return (t0[i] - t[i]) * (g[i] - t[i]);
  });
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      k_expit,       k_clip, k_axpy, k_stump_apply,  k_pseudo_outcome,
      k_sum,         k_dot,  k_dot3, k_sq_diff_sum,  k_w_sq_diff_sum,
      k_cal_cross_sum,
  };
  return t;
}

}  // namespace isocal::kernels

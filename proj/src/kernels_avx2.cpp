#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "isocal/kernels.hpp"
#include "isocal/math_core.hpp"

// AVX2 backend. Each op mirrors the scalar reference one IEEE operation at a
// time (fma <-> vfmadd, ternary selects <-> blendv, clamp <-> min/max pd), so
// lanes are bit-identical to the scalar path. Reductions stripe element i to
// lane i mod 4 exactly like the scalar Acc4.

namespace isocal::kernels {
namespace {

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

// Mirrors math::exp_pinned.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);

  x = _mm256_max_pd(x, _mm256_set1_pd(math::kExpMinArg));
  x = _mm256_min_pd(x, _mm256_set1_pd(math::kExpMaxArg));
  __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(log2e, x, half));
  x = _mm256_fnmadd_pd(n, c1, x);
  x = _mm256_fnmadd_pd(n, c2, x);
  __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(p0, xx, p1);
  px = _mm256_fmadd_pd(px, xx, p2);
  px = _mm256_mul_pd(x, px);
  __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
  qx = _mm256_fmadd_pd(qx, xx, q2);
  qx = _mm256_fmadd_pd(qx, xx, q3);
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(two, r, one);
  __m128i k32 = _mm256_cvtpd_epi32(n);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  __m256d scale = _mm256_castsi256_pd(bits);
  return _mm256_mul_pd(r, scale);
}

inline __m256d expit_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d e = exp_pd(_mm256_xor_pd(x, _mm256_set1_pd(-0.0)));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

struct VAcc {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();

  inline void add(__m256d v) {
    __m256d t = _mm256_add_pd(s, v);
    __m256d ge = _mm256_cmp_pd(abs_pd(s), abs_pd(v), _CMP_GE_OQ);
    __m256d corr_s = _mm256_add_pd(_mm256_sub_pd(s, t), v);
    __m256d corr_v = _mm256_add_pd(_mm256_sub_pd(v, t), s);
    c = _mm256_add_pd(c, _mm256_blendv_pd(corr_v, corr_s, ge));
    s = t;
  }

  // Remaining tail values go to lanes 0..tail_n-1 with the scalar formula.
  template <class Value>
  double finish(std::size_t tail_n, Value&& value) {
    alignas(32) double sa[4];
    alignas(32) double ca[4];
    _mm256_store_pd(sa, s);
    _mm256_store_pd(ca, c);
    for (std::size_t j = 0; j < tail_n; ++j) {
      double v = value(j);
      double t = sa[j] + v;
      if (std::fabs(sa[j]) >= std::fabs(v)) {
        ca[j] += (sa[j] - t) + v;
      } else {
        ca[j] += (v - t) + sa[j];
      }
      sa[j] = t;
    }
    // Identical pinned fold to the scalar Acc4::combine.
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
    for (int j = 0; j < 4; ++j) nadd(sa[j]);
    for (int j = 0; j < 4; ++j) nadd(ca[j]);
    return total + comp;
  }
};

void k_expit(std::span<const double> in, std::span<double> out) {
  std::size_t n = in.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&out[i], expit_pd(_mm256_loadu_pd(&in[i])));
  }
  for (; i < n; ++i) out[i] = math::expit_pinned(in[i]);
}

void k_clip(std::span<double> x, double lo, double hi) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(&x[i]);
    v = _mm256_min_pd(_mm256_max_pd(v, vlo), vhi);
    _mm256_storeu_pd(&x[i], v);
  }
  for (; i < n; ++i) {
    double v = x[i];
    v = (v > lo) ? v : lo;
    v = (v < hi) ? v : hi;
    x[i] = v;
  }
}

void k_axpy(double c, std::span<const double> x, std::span<double> y) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(vc, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    _mm256_storeu_pd(&y[i], r);
  }
  for (; i < n; ++i) y[i] = std::fma(c, x[i], y[i]);
}

void k_stump_apply(std::span<const double> x, double thr, double left,
                   double right, double scale, std::span<double> y) {
  const __m256d vthr = _mm256_set1_pd(thr);
  const __m256d vl = _mm256_set1_pd(left);
  const __m256d vr = _mm256_set1_pd(right);
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(&x[i]);
    __m256d lt = _mm256_cmp_pd(xv, vthr, _CMP_LT_OQ);
    __m256d sel = _mm256_blendv_pd(vr, vl, lt);
    __m256d r = _mm256_fmadd_pd(vs, sel, _mm256_loadu_pd(&y[i]));
    _mm256_storeu_pd(&y[i], r);
  }
  for (; i < n; ++i) {
    double sel = (x[i] < thr) ? left : right;
    y[i] = std::fma(scale, sel, y[i]);
  }
}

void k_pseudo_outcome(std::span<const double> a, std::span<const double> y,
                      std::span<const double> pi, std::span<const double> mu0,
                      std::span<const double> mu1, std::span<double> out) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d av = _mm256_loadu_pd(&a[i]);
    __m256d yv = _mm256_loadu_pd(&y[i]);
    __m256d pv = _mm256_loadu_pd(&pi[i]);
    __m256d m0 = _mm256_loadu_pd(&mu0[i]);
    __m256d m1 = _mm256_loadu_pd(&mu1[i]);
    __m256d treated = _mm256_cmp_pd(av, one, _CMP_EQ_OQ);
    __m256d mu_sel = _mm256_blendv_pd(m0, m1, treated);
    __m256d num = _mm256_sub_pd(av, pv);
    __m256d den = _mm256_mul_pd(pv, _mm256_sub_pd(one, pv));
    __m256d resid = _mm256_sub_pd(yv, mu_sel);
    __m256d chi = _mm256_add_pd(_mm256_sub_pd(m1, m0),
                                _mm256_mul_pd(_mm256_div_pd(num, den), resid));
    _mm256_storeu_pd(&out[i], chi);
  }
  for (; i < n; ++i) {
    double mu_sel = (a[i] == 1.0) ? mu1[i] : mu0[i];
    double num = a[i] - pi[i];
    double den = pi[i] * (1.0 - pi[i]);
    double resid = y[i] - mu_sel;
    out[i] = (mu1[i] - mu0[i]) + (num / den) * resid;
  }
}

double k_sum(std::span<const double> x) {
  VAcc acc;
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(&x[i]));
  return acc.finish(n - i, [&](std::size_t j) { return x[i + j]; });
}

double k_dot(std::span<const double> x, std::span<const double> y) {
  VAcc acc;
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i])));
  }
  return acc.finish(n - i, [&](std::size_t j) { return x[i + j] * y[i + j]; });
}

double k_dot3(std::span<const double> x, std::span<const double> y,
              std::span<const double> z) {
  VAcc acc;
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    acc.add(_mm256_mul_pd(xy, _mm256_loadu_pd(&z[i])));
  }
  return acc.finish(n - i,
                    [&](std::size_t j) { return (x[i + j] * y[i + j]) * z[i + j]; });
}

double k_sq_diff_sum(std::span<const double> x, std::span<const double> y) {
  VAcc acc;
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    acc.add(_mm256_mul_pd(d, d));
  }
  return acc.finish(n - i, [&](std::size_t j) {
    double d = x[i + j] - y[i + j];
    return d * d;
  });
}

double k_w_sq_diff_sum(std::span<const double> w, std::span<const double> x,
                       std::span<const double> y) {
  VAcc acc;
  std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&w[i]), _mm256_mul_pd(d, d)));
  }
  return acc.finish(n - i, [&](std::size_t j) {
    double d = x[i + j] - y[i + j];
    return w[i + j] * (d * d);
  });
}

double k_cal_cross_sum(std::span<const double> t0, std::span<const double> t,
                       std::span<const double> g) {
  VAcc acc;
  std::size_t n = t0.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d tv = _mm256_loadu_pd(&t[i]);
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(&t0[i]), tv);
    __m256d dg = _mm256_sub_pd(_mm256_loadu_pd(&g[i]), tv);
    acc.add(_mm256_mul_pd(d0, dg));
  }
  return acc.finish(n - i, [&](std::size_t j) {
    return (t0[i + j] - t[i + j]) * (g[i + j] - t[i + j]);
  });
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t = {
      k_expit,       k_clip, k_axpy, k_stump_apply,  k_pseudo_outcome,
      k_sum,         k_dot,  k_dot3, k_sq_diff_sum,  k_w_sq_diff_sum,
      k_cal_cross_sum,
  };
  return t;
}

}  // namespace isocal::kernels

#endif  // x86_64

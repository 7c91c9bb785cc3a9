#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

// Pinned transcendental kernels (Cephes-style rational approximations).
// Used everywhere instead of libm exp/log so results are identical across
// libc versions and across the scalar/AVX2 kernel backends. Accuracy is
// within ~2 ulp on the supported range. Inputs must be finite; NaN follows
// the clamp semantics of the SIMD min/max ops.

namespace isocal::math {

inline constexpr double kExpMinArg = -708.0;
inline constexpr double kExpMaxArg = 709.0;

// exp(x) for finite x, clamped to [kExpMinArg, kExpMaxArg]. The op sequence
// is mirrored one-to-one by the AVX2 backend; do not reorder.
inline double exp_pinned(double x) {
  constexpr double log2e = 1.4426950408889634073599;
  constexpr double c1 = 6.93145751953125e-1;
  constexpr double c2 = 1.42860682030941723212e-6;
  constexpr double p0 = 1.26177193074810590878e-4;
  constexpr double p1 = 3.02994407707441961300e-2;
  constexpr double p2 = 9.99999999999999999910e-1;
  constexpr double q0 = 3.00198505138664455042e-6;
  constexpr double q1 = 2.52448340349684104192e-3;
  constexpr double q2 = 2.27265548208155028766e-1;
  constexpr double q3 = 2.00000000000000000005e0;

  x = (x > kExpMinArg) ? x : kExpMinArg;  // matches maxpd NaN semantics
  x = (x < kExpMaxArg) ? x : kExpMaxArg;  // matches minpd NaN semantics
  double n = std::floor(std::fma(log2e, x, 0.5));
  x = std::fma(-n, c1, x);
  x = std::fma(-n, c2, x);
  double xx = x * x;
  double px = std::fma(p0, xx, p1);
  px = std::fma(px, xx, p2);
  px = x * px;
  double qx = std::fma(q0, xx, q1);
  qx = std::fma(qx, xx, q2);
  qx = std::fma(qx, xx, q3);
  double r = px / (qx - px);
  r = std::fma(2.0, r, 1.0);
  auto k = static_cast<std::int64_t>(n);
  double scale = std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
  return r * scale;
}

inline double expit_pinned(double x) { return 1.0 / (1.0 + exp_pinned(-x)); }

// log(x) for finite x > 0. Reduction x = (1+f)*2^e with 1+f in
// [sqrt(1/2), sqrt(2)), then log(1+f) = 2*atanh(s) with s = f/(2+f),
// |s| <= 0.1716, via the odd series truncated where terms fall below 1e-19.
inline double log_pinned(double x) {
  constexpr double sqrth = 0.70710678118654752440;
  constexpr double ln2_hi = 0.693359375;  // exact in 9 bits
  constexpr double ln2_lo = -2.121944400546905827679e-4;

  int e = 0;
  double m = std::frexp(x, &e);
  double f;
  if (m < sqrth) {
    e -= 1;
    f = m + m - 1.0;
  } else {
    f = m - 1.0;
  }
  double s = f / (2.0 + f);
  double z = s * s;
  double b = 2.0 / 23.0;
  b = std::fma(b, z, 2.0 / 21.0);
  b = std::fma(b, z, 2.0 / 19.0);
  b = std::fma(b, z, 2.0 / 17.0);
  b = std::fma(b, z, 2.0 / 15.0);
  b = std::fma(b, z, 2.0 / 13.0);
  b = std::fma(b, z, 2.0 / 11.0);
  b = std::fma(b, z, 2.0 / 9.0);
  b = std::fma(b, z, 2.0 / 7.0);
  b = std::fma(b, z, 2.0 / 5.0);
  b = std::fma(b, z, 2.0 / 3.0);
  b = b * z;
  double lm = std::fma(s, b, s + s);
  double de = static_cast<double>(e);
  double r = std::fma(de, ln2_lo, lm);
  return std::fma(de, ln2_hi, r);
}

}  // namespace isocal::math

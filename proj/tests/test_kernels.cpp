#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isocal/kernels.hpp"
#include "isocal/math_core.hpp"
#include "isocal/rng.hpp"

using namespace isocal;

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

std::vector<double> random_vec(rng::Xoshiro256pp& g, std::size_t n, double lo,
                               double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform(lo, hi);
  return v;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 33, 64, 257, 1001};

}  // namespace

TEST_CASE("pinned exp matches libm closely") {
  rng::Xoshiro256pp g(11);
  for (int i = 0; i < 20000; ++i) {
    double x = g.uniform(-40.0, 40.0);
    double got = math::exp_pinned(x);
    double want = std::exp(x);
    CHECK(std::fabs(got - want) <= 4e-16 * want);
  }
  CHECK(math::exp_pinned(0.0) == 1.0);
  // saturation region stays finite and monotone-ish
  CHECK(math::exp_pinned(800.0) > 1e307);
  CHECK(math::exp_pinned(-800.0) > 0.0);
  CHECK(math::exp_pinned(-800.0) < 1e-300);
}

TEST_CASE("pinned log matches libm closely") {
  rng::Xoshiro256pp g(12);
  for (int i = 0; i < 20000; ++i) {
    double x = std::exp(g.uniform(-300.0, 300.0));
    double got = math::log_pinned(x);
    double want = std::log(x);
    CHECK(std::fabs(got - want) <= 4e-16 * std::max(1.0, std::fabs(want)));
  }
  for (int i = 0; i < 20000; ++i) {
    double x = g.uniform(1e-12, 1.0);
    double got = math::log_pinned(x);
    double want = std::log(x);
    CHECK(std::fabs(got - want) <= 4e-16 * std::max(1.0, std::fabs(want)));
  }
  CHECK(math::log_pinned(1.0) == 0.0);
}

TEST_CASE("expit values and symmetry") {
  CHECK(math::expit_pinned(0.0) == 0.5);
  CHECK(math::expit_pinned(-0.25) == doctest::Approx(0.43782349911420189597).epsilon(1e-15));
  CHECK(math::expit_pinned(0.3) == doctest::Approx(0.57444251681165898715).epsilon(1e-15));
  CHECK(math::expit_pinned(1.5) == doctest::Approx(0.81757447619364365961).epsilon(1e-15));
  CHECK(math::expit_pinned(-2.0) == doctest::Approx(0.11920292202211755594).epsilon(1e-15));
  rng::Xoshiro256pp g(13);
  for (int i = 0; i < 20000; ++i) {
    double x = g.uniform(-30.0, 30.0);
    double s = math::expit_pinned(x) + math::expit_pinned(-x);
    CHECK(std::fabs(s - 1.0) <= 1e-15);
    double p = math::expit_pinned(x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("scalar and avx2 backends are bitwise identical") {
  if (!kernels::backend_supported(kernels::Backend::avx2)) {
    MESSAGE("avx2 unsupported on this machine; skipping equivalence checks");
    return;
  }
  const auto& sc = kernels::table(kernels::Backend::scalar);
  const auto& vx = kernels::table(kernels::Backend::avx2);
  rng::Xoshiro256pp g(17);

  for (std::size_t n : kSizes) {
    auto x = random_vec(g, n, -50.0, 50.0);
    auto y = random_vec(g, n, -50.0, 50.0);
    auto w = random_vec(g, n, 0.0, 5.0);

    // expit
    std::vector<double> o1(n), o2(n);
    sc.expit(x, o1);
    vx.expit(x, o2);
    CHECK(same_bits(o1, o2));

    // clip
    auto c1 = x, c2 = x;
    sc.clip(c1, -1.0, 1.0);
    vx.clip(c2, -1.0, 1.0);
    CHECK(same_bits(c1, c2));

    // axpy
    auto a1 = y, a2 = y;
    sc.axpy(0.37, x, a1);
    vx.axpy(0.37, x, a2);
    CHECK(same_bits(a1, a2));

    // stump_apply
    auto s1 = y, s2 = y;
    sc.stump_apply(x, 0.25, -1.5, 2.5, 0.1, s1);
    vx.stump_apply(x, 0.25, -1.5, 2.5, 0.1, s2);
    CHECK(same_bits(s1, s2));

    // pseudo_outcome
    std::vector<double> a(n), yy(n), pi(n), mu0(n), mu1(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g.bernoulli(0.5) ? 1.0 : 0.0;
      yy[i] = g.uniform(-3.0, 3.0);
      pi[i] = g.uniform(0.01, 0.99);
      mu0[i] = g.uniform(-2.0, 2.0);
      mu1[i] = g.uniform(-2.0, 2.0);
    }
    std::vector<double> p1(n), p2(n);
    sc.pseudo_outcome(a, yy, pi, mu0, mu1, p1);
    vx.pseudo_outcome(a, yy, pi, mu0, mu1, p2);
    CHECK(same_bits(p1, p2));

    // reductions
    CHECK(same_bits(sc.sum(x), vx.sum(x)));
    CHECK(same_bits(sc.dot(x, y), vx.dot(x, y)));
    CHECK(same_bits(sc.dot3(x, y, w), vx.dot3(x, y, w)));
    CHECK(same_bits(sc.sq_diff_sum(x, y), vx.sq_diff_sum(x, y)));
    CHECK(same_bits(sc.w_sq_diff_sum(w, x, y), vx.w_sq_diff_sum(w, x, y)));
    CHECK(same_bits(sc.cal_cross_sum(x, y, w), vx.cal_cross_sum(x, y, w)));
  }
}

TEST_CASE("compensated reductions match long double reference") {
  const auto& sc = kernels::table(kernels::Backend::scalar);
  rng::Xoshiro256pp g(19);
  for (std::size_t n : {std::size_t(10), std::size_t(1000), std::size_t(20000)}) {
    auto x = random_vec(g, n, -1e6, 1e6);
    auto y = random_vec(g, n, -1e6, 1e6);
    long double ref_sum = 0, ref_dot = 0, ref_sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ref_sum += static_cast<long double>(x[i]);
      ref_dot += static_cast<long double>(x[i]) * y[i];
      long double d = static_cast<long double>(x[i]) - y[i];
      ref_sq += d * d;
    }
    CHECK(std::fabs(sc.sum(x) - static_cast<double>(ref_sum)) <=
          1e-9 * std::max(1.0, std::fabs(static_cast<double>(ref_sum))));
    CHECK(std::fabs(sc.dot(x, y) - static_cast<double>(ref_dot)) <=
          1e-9 * std::fabs(static_cast<double>(ref_dot)));
    CHECK(std::fabs(sc.sq_diff_sum(x, y) - static_cast<double>(ref_sq)) <=
          1e-9 * static_cast<double>(ref_sq));
  }
  // cancellation-heavy case where naive summation loses everything
  std::vector<double> bad = {1e16, 1.0, -1e16, 1.0, 1e16, 1.0, -1e16, 1.0};
  CHECK(sc.sum(bad) == 4.0);
}

TEST_CASE("kernel edge cases") {
  const auto& sc = kernels::table(kernels::Backend::scalar);
  CHECK(sc.sum(std::span<const double>{}) == 0.0);
  std::vector<double> empty_out;
  sc.expit(std::span<const double>{}, empty_out);

  std::vector<double> v = {0.5, 0.005, 0.995};
  sc.clip(v, 0.01, 0.99);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.01);
  CHECK(v[2] == 0.99);
}

TEST_CASE("backend dispatch") {
  CHECK(kernels::backend_supported(kernels::Backend::scalar));
  CHECK(kernels::backend_name(kernels::Backend::avx2) == "avx2");
  kernels::Backend prev = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  std::vector<double> in = {0.0}, out = {0.0};
  kernels::expit(in, out);
  CHECK(out[0] == 0.5);
  kernels::set_backend(prev);
}

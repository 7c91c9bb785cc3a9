#include <cstdlib>
#include <stdexcept>
#include <string>

#include "isocal/kernels.hpp"

namespace isocal::kernels {

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif

bool backend_supported(Backend b) {
  if (b == Backend::scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::string backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

const KernelTable& table(Backend b) {
  if (b == Backend::scalar) return scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
  if (backend_supported(Backend::avx2)) return avx2_table();
#endif
  throw std::runtime_error("kernel backend not supported on this cpu: " +
                           backend_name(b));
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("ISOCAL_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && backend_supported(Backend::avx2)) return Backend::avx2;
    return Backend::scalar;
  }
  return backend_supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Backend& backend_ref() {
  static Backend b = initial_backend();
  return b;
}

}  // namespace

Backend active_backend() { return backend_ref(); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::runtime_error("kernel backend not supported on this cpu: " +
                             backend_name(b));
  }
  backend_ref() = b;
}

}  // namespace isocal::kernels

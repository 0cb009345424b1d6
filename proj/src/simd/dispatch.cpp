#include <atomic>
#include <cstdlib>
#include <string>

#include "backends.hpp"
#include "lsaga/simd.hpp"

namespace lsaga::simd {
namespace {

bool host_supports(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
      // NEON is part of the aarch64 baseline.
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels* compiled_table(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &scalar_kernels();
    case Backend::Avx2:
      return detail::avx2_table();
    case Backend::Neon:
      return detail::neon_table();
  }
  return nullptr;
}

const Kernels* initial_choice() {
  if (const char* env = std::getenv("LSAGA_SIMD")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == backend_name(b)) {
        if (const Kernels* k = find_kernels(b)) return k;
      }
    }
  }
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (const Kernels* k = find_kernels(b)) return k;
  }
  return &scalar_kernels();
}

std::atomic<const Kernels*>& active_slot() {
  static std::atomic<const Kernels*> slot{initial_choice()};
  return slot;
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

const Kernels* find_kernels(Backend backend) {
  const Kernels* table = compiled_table(backend);
  if (table == nullptr || !host_supports(backend)) return nullptr;
  return table;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (find_kernels(b) != nullptr) out.push_back(b);
  }
  return out;
}

const Kernels& active() {
  return *active_slot().load(std::memory_order_relaxed);
}

bool select_backend(Backend backend) {
  const Kernels* table = find_kernels(backend);
  if (table == nullptr) return false;
  active_slot().store(table, std::memory_order_relaxed);
  return true;
}

}  // namespace lsaga::simd

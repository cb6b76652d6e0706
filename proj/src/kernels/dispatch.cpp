#include <atomic>
#include <cstdlib>
#include <cstring>

#include "tsfit/errors.hpp"
#include "tsfit/kernels/simd.hpp"

namespace tsfit::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Isa detect_isa() {
  if (const char* env = std::getenv("TSFIT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
    if (std::strcmp(env, "auto") != 0) return Isa::scalar;  // unknown value: play safe
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& isa_slot() {
  static std::atomic<int> slot{static_cast<int>(detect_isa())};
  return slot;
}

}  // namespace

Isa active_isa() { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2())
    throw DomainError("set_isa: avx2 not supported on this CPU");
  isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

namespace detail {

const KernelTable& active_table() {
  return active_isa() == Isa::avx2 ? avx2_table : scalar_table;
}

}  // namespace detail

}  // namespace tsfit::simd

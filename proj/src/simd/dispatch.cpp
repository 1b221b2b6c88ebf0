#include "amkm/simd/ops.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace amkm::simd {

#if !(defined(__x86_64__) || defined(_M_X64))
// Non-x86 builds carry only the scalar table.
const Ops& avx2_ops() { return scalar_ops(); }
#endif

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* resolve_from_env() {
    const char* env = std::getenv("AMKM_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_available()) {
                throw std::runtime_error("AMKM_SIMD=avx2 but this CPU/build lacks AVX2+FMA");
            }
            return &avx2_ops();
        }
        // "auto" and anything else fall through to detection.
    }
    return avx2_available() ? &avx2_ops() : &scalar_ops();
}

}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (ops == nullptr) {
        ops = resolve_from_env();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void select(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            g_active.store(&scalar_ops(), std::memory_order_release);
            return;
        case Isa::avx2:
            if (!avx2_available()) {
                throw std::runtime_error("select(avx2): unsupported on this CPU/build");
            }
            g_active.store(&avx2_ops(), std::memory_order_release);
            return;
    }
    throw std::invalid_argument("select: unknown ISA");
}

}  // namespace amkm::simd

#pragma once

#include <cstddef>

namespace amkm::simd {

enum class Isa { scalar, avx2 };

/// Hot arithmetic kernels behind the kernel/matcher/eval modules. One scalar
/// reference implementation plus ISA variants selected at runtime; every
/// variant is equivalence-tested against the scalar path.
///
/// Selection order: explicit select() > AMKM_SIMD env var (auto|scalar|avx2)
/// > best ISA the CPU reports.
struct Ops {
    const char* name;

    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // out[j] = ||x - rows_j||^2 for row-major `rows` (nrows x dim)
    void (*squared_distance_row)(const double* x, const double* rows, std::size_t nrows,
                                 std::size_t dim, double* out);
    // out[i] = exp(scale * x[i]); x finite
    void (*exp_scale)(const double* x, double scale, double* out, std::size_t n);
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // falls back to scalar_ops() when built without AVX2
bool avx2_available();

/// The runtime-selected table. Resolved once on first use.
const Ops& active();

/// Override the selection (test hook). Throws if the ISA is unsupported here.
void select(Isa isa);

}  // namespace amkm::simd

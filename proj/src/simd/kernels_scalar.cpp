#include "amkm/simd/ops.hpp"

#include <cmath>

namespace amkm::simd {
namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

void squared_distance_row_scalar(const double* x, const double* rows, std::size_t nrows,
                                 std::size_t dim, double* out) {
    for (std::size_t j = 0; j < nrows; ++j) {
        out[j] = squared_distance_scalar(x, rows + j * dim, dim);
    }
}

void exp_scale_scalar(const double* x, double scale, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(scale * x[i]);
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",
        sum_scalar,
        dot_scalar,
        axpy_scalar,
        squared_distance_scalar,
        squared_distance_row_scalar,
        exp_scale_scalar,
    };
    return ops;
}

}  // namespace amkm::simd

// AVX2+FMA variants of the hot kernels. This translation unit is the only one
// compiled with -mavx2 -mfma; execution is gated by the runtime dispatcher.

#include "amkm/simd/ops.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace amkm::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return hsum(acc) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(acc) + tail;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        double diff = a[i] - b[i];
        tail += diff * diff;
    }
    return hsum(acc) + tail;
}

void squared_distance_row_avx2(const double* x, const double* rows, std::size_t nrows,
                               std::size_t dim, double* out) {
    if (dim == 1) {
        // One-dimensional rows are contiguous: vectorize across rows instead.
        __m256d vx = _mm256_set1_pd(x[0]);
        std::size_t j = 0;
        for (; j + 4 <= nrows; j += 4) {
            __m256d diff = _mm256_sub_pd(vx, _mm256_loadu_pd(rows + j));
            _mm256_storeu_pd(out + j, _mm256_mul_pd(diff, diff));
        }
        for (; j < nrows; ++j) {
            double diff = x[0] - rows[j];
            out[j] = diff * diff;
        }
        return;
    }
    for (std::size_t j = 0; j < nrows; ++j) {
        out[j] = squared_distance_avx2(x, rows + j * dim, dim);
    }
}

// exp on four lanes, Cephes-style: reduce by n = round(x*log2(e)), evaluate a
// rational polynomial on the remainder, scale by 2^n through the exponent
// bits. Inputs below log(DBL_MIN) flush to zero, above log(DBL_MAX) to inf.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d underflow = _mm256_set1_pd(-708.396418532264106224);
    const __m256d overflow = _mm256_set1_pd(709.782712893383996732);

    __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);
    __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    __m256d res = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // res *= 2^n: n is within int32 range after the underflow/overflow masks.
    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    res = _mm256_mul_pd(res, _mm256_castsi256_pd(pow2));

    res = _mm256_andnot_pd(_mm256_cmp_pd(x, underflow, _CMP_LT_OQ), res);
    __m256d inf = _mm256_set1_pd(__builtin_inf());
    res = _mm256_blendv_pd(res, inf, _mm256_cmp_pd(x, overflow, _CMP_GT_OQ));
    return res;
}

void exp_scale_avx2(const double* x, double scale, double* out, std::size_t n) {
    __m256d vs = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, exp_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(x + i))));
    }
    if (i < n) {
        double buf_in[4] = {0, 0, 0, 0};
        double buf_out[4];
        for (std::size_t k = i; k < n; ++k) buf_in[k - i] = x[k];
        _mm256_storeu_pd(buf_out, exp_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(buf_in))));
        for (std::size_t k = i; k < n; ++k) out[k] = buf_out[k - i];
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",
        sum_avx2,
        dot_avx2,
        axpy_avx2,
        squared_distance_avx2,
        squared_distance_row_avx2,
        exp_scale_avx2,
    };
    return ops;
}

}  // namespace amkm::simd

#endif  // __AVX2__ && __FMA__

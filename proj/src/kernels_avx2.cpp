// Built with -mavx2 -mfma. Nothing in this file may run before the
// dispatcher in kernels.cpp has confirmed CPU support.
#include "marginpursuit/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace marginpursuit::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4), acc1);
    }
    for (; j + 4 <= n; j += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(y + j, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    }
    for (; j < n; ++j) y[j] += alpha * x[j];
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + j));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + j + 4));
    }
    for (; j + 4 <= n; j += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + j));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) acc += x[j];
    return acc;
}

// Elementwise kernels use the same operation order as the scalar reference
// (no FMA) so their outputs are bit-identical to it.
void psi_avx2(const double* in, double* out, std::size_t n) {
    const __m256d knot = _mm256_set1_pd(kKnot);
    const __m256d cap = _mm256_set1_pd(kPsiMax);
    const __m256d six = _mm256_set1_pd(6.0);
    const __m256d sign_bit = _mm256_set1_pd(-0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d u = _mm256_loadu_pd(in + j);
        const __m256d cube = _mm256_mul_pd(_mm256_mul_pd(u, u), u);
        const __m256d poly = _mm256_sub_pd(u, _mm256_div_pd(cube, six));
        const __m256d mag = _mm256_andnot_pd(sign_bit, u);
        const __m256d sat = _mm256_or_pd(cap, _mm256_and_pd(sign_bit, u));
        const __m256d outside = _mm256_cmp_pd(mag, knot, _CMP_GT_OQ);
        _mm256_storeu_pd(out + j, _mm256_blendv_pd(poly, sat, outside));
    }
    for (; j < n; ++j) {
        const double u = in[j];
        out[j] = u > kKnot ? kPsiMax : (u < -kKnot ? -kPsiMax : u - u * u * u / 6.0);
    }
}

void rho_avx2(const double* in, double* out, std::size_t n) {
    const __m256d knot = _mm256_set1_pd(kKnot);
    const __m256d slope = _mm256_set1_pd(kPsiMax);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d t24 = _mm256_set1_pd(24.0);
    const __m256d sign_bit = _mm256_set1_pd(-0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d a = _mm256_andnot_pd(sign_bit, _mm256_loadu_pd(in + j));
        const __m256d a2 = _mm256_mul_pd(a, a);
        const __m256d poly = _mm256_sub_pd(_mm256_div_pd(a2, two), _mm256_div_pd(_mm256_mul_pd(a2, a2), t24));
        const __m256d lin = _mm256_sub_pd(_mm256_mul_pd(a, slope), half);
        const __m256d outside = _mm256_cmp_pd(a, knot, _CMP_GT_OQ);
        _mm256_storeu_pd(out + j, _mm256_blendv_pd(poly, lin, outside));
    }
    for (; j < n; ++j) {
        const double a = std::fabs(in[j]);
        const double a2 = a * a;
        out[j] = a <= kKnot ? a2 / 2.0 - a2 * a2 / 24.0 : a * kPsiMax - 0.5;
    }
}

void margins_avx2(const double* rows, const double* labels, const double* w,
                  double* out, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = labels[i] * dot_avx2(rows + i * d, w, d);
    }
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, axpy_avx2, sum_avx2,
                            psi_avx2,  rho_avx2, margins_avx2};

}  // namespace

const KernelTable& avx2_table_unchecked() { return kAvx2; }

}  // namespace marginpursuit::kernels

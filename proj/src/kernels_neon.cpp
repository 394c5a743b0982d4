// aarch64 only; Advanced SIMD is part of the base ISA there.
#include "marginpursuit/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace marginpursuit::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + j), vld1q_f64(y + j));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + j + 2), vld1q_f64(y + j + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t a = vdupq_n_f64(alpha);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        vst1q_f64(y + j, vfmaq_f64(vld1q_f64(y + j), a, vld1q_f64(x + j)));
    }
    for (; j < n; ++j) y[j] += alpha * x[j];
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(x + j));
        acc1 = vaddq_f64(acc1, vld1q_f64(x + j + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; j < n; ++j) acc += x[j];
    return acc;
}

void psi_neon(const double* in, double* out, std::size_t n) {
    const float64x2_t knot = vdupq_n_f64(kKnot);
    const float64x2_t cap = vdupq_n_f64(kPsiMax);
    const float64x2_t six = vdupq_n_f64(6.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t u = vld1q_f64(in + j);
        const float64x2_t cube = vmulq_f64(vmulq_f64(u, u), u);
        const float64x2_t poly = vsubq_f64(u, vdivq_f64(cube, six));
        const uint64x2_t above = vcgtq_f64(u, knot);
        const uint64x2_t below = vcltq_f64(u, vnegq_f64(knot));
        float64x2_t r = vbslq_f64(above, cap, poly);
        r = vbslq_f64(below, vnegq_f64(cap), r);
        vst1q_f64(out + j, r);
    }
    for (; j < n; ++j) {
        const double u = in[j];
        out[j] = u > kKnot ? kPsiMax : (u < -kKnot ? -kPsiMax : u - u * u * u / 6.0);
    }
}

void rho_neon(const double* in, double* out, std::size_t n) {
    const float64x2_t knot = vdupq_n_f64(kKnot);
    const float64x2_t slope = vdupq_n_f64(kPsiMax);
    const float64x2_t half = vdupq_n_f64(0.5);
    const float64x2_t two = vdupq_n_f64(2.0);
    const float64x2_t t24 = vdupq_n_f64(24.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t a = vabsq_f64(vld1q_f64(in + j));
        const float64x2_t a2 = vmulq_f64(a, a);
        const float64x2_t poly = vsubq_f64(vdivq_f64(a2, two), vdivq_f64(vmulq_f64(a2, a2), t24));
        const float64x2_t lin = vsubq_f64(vmulq_f64(a, slope), half);
        vst1q_f64(out + j, vbslq_f64(vcgtq_f64(a, knot), lin, poly));
    }
    for (; j < n; ++j) {
        const double a = std::fabs(in[j]);
        const double a2 = a * a;
        out[j] = a <= kKnot ? a2 / 2.0 - a2 * a2 / 24.0 : a * kPsiMax - 0.5;
    }
}

void margins_neon(const double* rows, const double* labels, const double* w,
                  double* out, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = labels[i] * dot_neon(rows + i * d, w, d);
    }
}

constexpr KernelTable kNeon{Isa::neon, dot_neon, axpy_neon, sum_neon,
                            psi_neon,  rho_neon, margins_neon};

}  // namespace

const KernelTable& neon_table_unchecked() { return kNeon; }

}  // namespace marginpursuit::kernels

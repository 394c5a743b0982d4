#include "marginpursuit/kernels.hpp"

#include <cmath>

namespace marginpursuit::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += x[j];
    return acc;
}

void psi_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double u = in[j];
        if (u > kKnot) {
            out[j] = kPsiMax;
        } else if (u < -kKnot) {
            out[j] = -kPsiMax;
        } else {
            out[j] = u - u * u * u / 6.0;
        }
    }
}

void rho_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::fabs(in[j]);
        if (a <= kKnot) {
            const double a2 = a * a;
            out[j] = a2 / 2.0 - a2 * a2 / 24.0;
        } else {
            out[j] = a * kPsiMax - 0.5;
        }
    }
}

void margins_scalar(const double* rows, const double* labels, const double* w,
                    double* out, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = labels[i] * dot_scalar(rows + i * d, w, d);
    }
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, axpy_scalar, sum_scalar,
                              psi_scalar,  rho_scalar, margins_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace marginpursuit::kernels

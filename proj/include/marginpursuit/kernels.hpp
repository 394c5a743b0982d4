#pragma once
// Data-parallel inner loops shared by the loss, estimator and trainer.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on aarch64) are compiled in separate
// translation units and picked once at startup from the CPU feature set.
// Results of the vector variants differ from the reference only by
// floating-point reassociation; tests/test_kernels.cpp pins the bound.
//
// Setting MARGINPURSUIT_SIMD=scalar in the environment forces the
// reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace marginpursuit::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// sqrt(2) and psi(sqrt(2)) = 2*sqrt(2)/3, the saturation level of psi.
inline constexpr double kKnot = 1.41421356237309504880;
inline constexpr double kPsiMax = 0.94280904158206336587;

struct KernelTable {
    Isa isa;
    // sum_j x[j] * y[j]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[j] += alpha * x[j]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_j x[j]
    double (*sum)(const double* x, std::size_t n);
    // out[j] = psi(in[j]); in and out may alias
    void (*psi)(const double* in, double* out, std::size_t n);
    // out[j] = rho(in[j]); in and out may alias
    void (*rho)(const double* in, double* out, std::size_t n);
    // out[i] = labels[i] * <rows[i*d .. i*d+d), w>
    void (*margins)(const double* rows, const double* labels, const double* w,
                    double* out, std::size_t n, std::size_t d);
};

const KernelTable& scalar_kernels();

// nullptr when the variant is not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Kernel table used by the library; resolved on first call.
const KernelTable& active();

// Convenience wrappers over active().
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> x);

}  // namespace marginpursuit::kernels

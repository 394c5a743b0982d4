#include "marginpursuit/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace marginpursuit::kernels {

#if defined(MARGINPURSUIT_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif
#if defined(MARGINPURSUIT_HAVE_NEON)
const KernelTable& neon_table_unchecked();
#endif

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(MARGINPURSUIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &avx2_table_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(MARGINPURSUIT_HAVE_NEON)
    return &neon_table_unchecked();
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& resolve() {
    if (const char* forced = std::getenv("MARGINPURSUIT_SIMD")) {
        if (std::string_view(forced) == "scalar") return scalar_kernels();
    }
    if (const KernelTable* t = avx2_kernels()) return *t;
    if (const KernelTable* t = neon_kernels()) return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = resolve();
    return table;
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
    return active().dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    active().axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace marginpursuit::kernels

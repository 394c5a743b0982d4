#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "marginpursuit/kernels.hpp"
#include "marginpursuit/loss.hpp"

namespace k = marginpursuit::kernels;

namespace {

// Every vector table available on this machine, scalar excluded.
std::vector<const k::KernelTable*> vector_tables() {
    std::vector<const k::KernelTable*> out;
    if (const auto* t = k::avx2_kernels()) out.push_back(t);
    if (const auto* t = k::neon_kernels()) out.push_back(t);
    return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

// Lengths straddling every unroll width and tail path.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 127, 1000, 4099};

// Reassociated sums agree with the sequential sum up to n ulps of the sum of
// magnitudes.
double reduction_bound(const std::vector<double>& terms) {
    double mag = 0.0;
    for (double t : terms) mag += std::fabs(t);
    return 4.0 * static_cast<double>(terms.size() + 1) * 2.220446049250313e-16 * mag;
}

}  // namespace

TEST_CASE("scalar table is the reference definition") {
    const auto& s = k::scalar_kernels();
    CHECK(s.isa == k::Isa::scalar);
    const std::vector<double> x{1, 2, 3}, y{4, -5, 6};
    CHECK(s.dot(x.data(), y.data(), 3) == 12.0);
    CHECK(s.sum(x.data(), 3) == 6.0);
    std::vector<double> z{1, 1, 1};
    s.axpy(2.0, x.data(), z.data(), 3);
    CHECK(z == std::vector<double>{3, 5, 7});
    const std::vector<double> u{0.0, 1.0, k::kKnot, 3.0, -3.0};
    std::vector<double> p(u.size()), r(u.size());
    s.psi(u.data(), p.data(), u.size());
    s.rho(u.data(), r.data(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(p[i] == marginpursuit::psi(u[i]));
        CHECK(r[i] == marginpursuit::rho(u[i]));
    }
}

TEST_CASE("active table honours the environment override") {
    const char* env = std::getenv("MARGINPURSUIT_SIMD");
    const auto& a = k::active();
    if (env != nullptr && std::string(env) == "scalar") {
        CHECK(a.isa == k::Isa::scalar);
    } else if (k::avx2_kernels() != nullptr) {
        CHECK(a.isa == k::Isa::avx2);
    } else if (k::neon_kernels() != nullptr) {
        CHECK(a.isa == k::Isa::neon);
    }
    MESSAGE("active kernels: " << k::isa_name(a.isa));
}

TEST_CASE("elementwise vector kernels are bit-identical to scalar") {
    const auto& ref = k::scalar_kernels();
    std::mt19937_64 rng(11);
    for (const auto* t : vector_tables()) {
        CAPTURE(k::isa_name(t->isa));
        for (std::size_t n : kLengths) {
            CAPTURE(n);
            // Spread across both knots and include exact knot values.
            auto in = random_vector(rng, n, 2.0);
            if (n > 2) {
                in[0] = k::kKnot;
                in[1] = -k::kKnot;
            }
            std::vector<double> a(n), b(n);
            ref.psi(in.data(), a.data(), n);
            t->psi(in.data(), b.data(), n);
            CHECK(a == b);
            ref.rho(in.data(), a.data(), n);
            t->rho(in.data(), b.data(), n);
            CHECK(a == b);

            const auto x = random_vector(rng, n, 1.0);
            auto y1 = random_vector(rng, n, 1.0);
            auto y2 = y1;
            ref.axpy(-0.37, x.data(), y1.data(), n);
            t->axpy(-0.37, x.data(), y2.data(), n);
            // axpy may fuse the multiply-add: one rounding instead of two.
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::fabs(y1[i] - y2[i]) <= 2.3e-16 * (std::fabs(0.37 * x[i]) + std::fabs(y1[i])));
            }
        }
    }
}

TEST_CASE("in-place psi and rho") {
    std::mt19937_64 rng(3);
    const auto in = random_vector(rng, 37, 2.0);
    for (const auto* t : vector_tables()) {
        auto v = in;
        t->psi(v.data(), v.data(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == marginpursuit::psi(in[i]));
    }
}

TEST_CASE("reductions agree with scalar up to reassociation") {
    const auto& ref = k::scalar_kernels();
    std::mt19937_64 rng(5);
    for (const auto* t : vector_tables()) {
        CAPTURE(k::isa_name(t->isa));
        for (std::size_t n : kLengths) {
            CAPTURE(n);
            const auto x = random_vector(rng, n, 1.0);
            const auto y = random_vector(rng, n, 1.0);
            std::vector<double> prod(n);
            for (std::size_t i = 0; i < n; ++i) prod[i] = x[i] * y[i];
            CHECK(std::fabs(ref.dot(x.data(), y.data(), n) - t->dot(x.data(), y.data(), n)) <= reduction_bound(prod));
            CHECK(std::fabs(ref.sum(x.data(), n) - t->sum(x.data(), n)) <= reduction_bound(x));
        }
    }
}

TEST_CASE("margins kernel agrees with scalar for every shape") {
    const auto& ref = k::scalar_kernels();
    std::mt19937_64 rng(9);
    for (const auto* t : vector_tables()) {
        for (std::size_t d : {1, 2, 3, 4, 5, 8, 13, 64}) {
            for (std::size_t n : {0, 1, 2, 5, 17}) {
                const auto rows = random_vector(rng, n * d, 1.0);
                const auto w = random_vector(rng, d, 1.0);
                std::vector<double> labels(n);
                for (std::size_t i = 0; i < n; ++i) labels[i] = (i % 3 == 0) ? -1.0 : 1.0;
                std::vector<double> a(n), b(n);
                ref.margins(rows.data(), labels.data(), w.data(), a.data(), n, d);
                t->margins(rows.data(), labels.data(), w.data(), b.data(), n, d);
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<double> prod(d);
                    for (std::size_t j = 0; j < d; ++j) prod[j] = rows[i * d + j] * w[j];
                    CHECK(std::fabs(a[i] - b[i]) <= reduction_bound(prod));
                }
            }
        }
    }
}

TEST_CASE("span wrappers check lengths") {
    const std::vector<double> x{1, 2}, y{1, 2, 3};
    CHECK_THROWS_AS(k::dot(x, y), std::invalid_argument);
    std::vector<double> z{0, 0, 0};
    CHECK_THROWS_AS(k::axpy(1.0, x, z), std::invalid_argument);
}

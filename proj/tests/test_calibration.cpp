#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "marginpursuit/calibration.hpp"
#include "oracles.hpp"

using namespace marginpursuit;
using doctest::Approx;

namespace {

const double kRoot2 = std::sqrt(2.0);

// min over u in [-gamma, gamma] of eta phi(u) + (1 - eta) phi(-u).
oracle::GridMin grid_H(double eta, double s, double gamma, std::size_t steps = 200000) {
    auto c = [&](long double u) {
        return eta * oracle::phi(u, s, gamma) + (1.0L - eta) * oracle::phi(-u, s, gamma);
    };
    return oracle::grid_minimize(c, -gamma, gamma, steps);
}

double peak(const ScaledLoss& l) { return l.s() * l.s() * static_cast<double>(oracle::rho(l.gamma() / l.s())); }

}  // namespace

TEST_CASE("conditional risk hand values") {
    for (double g : {0.3, 1.0, 2.5}) {
        const ScaledLoss l(1.0, g);
        CHECK(conditional_risk(g, 1.0, l) == 0.0);
        CHECK(conditional_risk(-g, 0.0, l) == 0.0);
        for (double eta : {0.0, 0.2, 0.5, 0.9, 1.0}) {
            CHECK(conditional_risk(0.0, eta, l) == Approx(static_cast<double>(oracle::rho(g))).epsilon(1e-15));
        }
    }
    CHECK_THROWS_AS(conditional_risk(0.0, -0.1, ScaledLoss(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(conditional_risk(0.0, 1.1, ScaledLoss(1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("closed-form optima") {
    for (double s : {0.5, 1.0, 3.0}) {
        for (double g : {0.4, 1.0, 2.0}) {
            const ScaledLoss l(s, g);
            auto zero = optimal_conditional_risk(0.0, l);
            CHECK(zero.H == 0.0);
            CHECK(zero.u_star == -g);
            auto one = optimal_conditional_risk(1.0, l);
            CHECK(one.H == 0.0);
            CHECK(one.u_star == g);
            auto half = optimal_conditional_risk(0.5, l);
            CHECK(half.H == Approx(peak(l)).epsilon(1e-15));
            CHECK(half.u_star == 0.0);
        }
    }
    CHECK_THROWS_AS(optimal_conditional_risk(1.5, ScaledLoss(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(optimal_conditional_risk(0.3, ScaledLoss(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("eta 0.8, gamma 0.5: double-cube optimum") {
    const ScaledLoss l(1.0, 0.5);
    const auto opt = optimal_conditional_risk(0.8, l);
    CHECK(opt.condition == CubicCondition::double_cube);
    CHECK(opt.u_star > 0.0);
    CHECK(opt.u_star < 0.5);
    // rho'(u - g)/rho'(u + g) = (eta - 1)/eta = -0.25
    const double ratio = static_cast<double>(oracle::psi(opt.u_star - 0.5) / oracle::psi(opt.u_star + 0.5));
    CHECK(ratio == Approx(-0.25).epsilon(1e-8));
    const auto grid = grid_H(0.8, 1.0, 0.5, 1000000);
    CHECK(std::fabs(opt.H - static_cast<double>(grid.fx)) <= 1e-10);
}

TEST_CASE("eta 0.9, gamma 2: minus single-cube optimum") {
    const ScaledLoss l(1.0, 2.0);
    const auto opt = optimal_conditional_risk(0.9, l);
    CHECK(opt.condition == CubicCondition::minus_single_cube);
    CHECK(std::fabs(first_order_residual(opt.u_star, 0.9, 2.0)) <= 1e-8);
    CHECK(std::fabs(opt.H - static_cast<double>(grid_H(0.9, 1.0, 2.0).fx)) <= 1e-10);
    // Mirror image uses the plus condition.
    const auto mirror = optimal_conditional_risk(0.1, l);
    CHECK(mirror.condition == CubicCondition::plus_single_cube);
}

TEST_CASE("first-order residual, oracle equivalence and symmetry across regimes") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ue(0.0, 1.0), us(0.2, 5.0);
    const double bands[3][2] = {{0.05, kRoot2 / 2.0}, {kRoot2 / 2.0, kRoot2}, {kRoot2, 4.0}};
    for (const auto& band : bands) {
        std::uniform_real_distribution<double> ug(band[0], band[1]);
        for (int rep = 0; rep < 70; ++rep) {
            double eta = ue(rng);
            if (std::fabs(eta - 0.5) < 1e-6 || eta == 0.0) eta = 0.3;
            const double s = us(rng), g = ug(rng) * s;
            const ScaledLoss l(s, g);
            const auto opt = optimal_conditional_risk(eta, l);
            CAPTURE(eta);
            CAPTURE(s);
            CAPTURE(g);
            CHECK(std::fabs(first_order_residual(opt.u_star / s, eta, g / s)) <= 1e-8);
            CHECK(opt.u_star >= -g);
            CHECK(opt.u_star <= g);
            CHECK(opt.H == Approx(conditional_risk(opt.u_star, eta, l)).epsilon(1e-14).scale(1.0));
            CHECK(std::fabs(opt.H - static_cast<double>(grid_H(eta, s, g, 20000).fx)) <= 1e-8 * std::max(1.0, s * s));
            CHECK(optimal_conditional_risk(1.0 - eta, l).u_star == Approx(-opt.u_star).epsilon(1e-10).scale(1.0));
            const auto unit = optimal_conditional_risk(eta, ScaledLoss(1.0, g / s));
            CHECK(opt.u_star == Approx(s * unit.u_star).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("psi transform endpoints and an interior value") {
    for (double s : {0.5, 1.0, 4.0}) {
        for (double g : {0.5, 1.0, 3.0}) {
            const ScaledLoss l(s, g);
            CHECK(psi_transform(0.0, l) == Approx(0.0).epsilon(1e-15).scale(1.0));
            CHECK(psi_transform(1.0, l) == Approx(peak(l)).epsilon(1e-15));
        }
    }
    const ScaledLoss l(1.0, 1.0);
    const double expect = static_cast<double>(oracle::rho(1.0) - grid_H(0.75, 1.0, 1.0, 1000000).fx);
    CHECK(psi_transform(0.5, l) == Approx(expect).epsilon(1e-10));
    CHECK_THROWS_AS(psi_transform(-0.1, l), std::invalid_argument);
    CHECK_THROWS_AS(psi_transform(1.1, l), std::invalid_argument);
}

TEST_CASE("psi table construction") {
    const ScaledLoss l(2.0, 1.5);
    const auto two = PsiTable::build(l, 2);
    REQUIRE(two.size() == 2);
    CHECK(two.grid()[0] == 0.0);
    CHECK(two.grid()[1] == 1.0);
    CHECK(two.values()[0] == Approx(0.0).scale(1.0));
    CHECK(two.values()[1] == Approx(peak(l)).epsilon(1e-15));
    CHECK_THROWS_AS(PsiTable::build(l, 1), std::invalid_argument);

    const auto t = build_psi_table(ScaledLoss(1.0, kRoot2 / 2.0));
    REQUIRE(t.size() == 2500);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.values()[k] >= t.values()[k - 1]);
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        CHECK(t.values()[k + 1] - 2.0 * t.values()[k] + t.values()[k - 1] >= -1e-9);
    }
    for (std::size_t k = 0; k < t.size(); k += 97) CHECK(t.values()[k] == psi_transform(t.grid()[k], t.loss()));
}

TEST_CASE("psi table inverse") {
    const auto t = PsiTable::build(ScaledLoss(1.0, 1.0));
    CHECK(psi_inverse(0.0, t) == 0.0);
    CHECK(psi_inverse(t.values().back(), t) == 1.0);
    CHECK(psi_inverse(10.0, t) == 1.0);
    CHECK_THROWS_AS(psi_inverse(-1e-3, t), std::invalid_argument);

    const std::size_t k03 = static_cast<std::size_t>(std::floor(0.3 * 2499.0));
    const double a = t.values()[k03];
    const double u = psi_inverse(a, t);
    CHECK(u <= 0.3);
    CHECK(u == t.grid()[k03]);

    // Independent scan: largest grid point with value <= a.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ua(0.0, t.values().back());
    for (int rep = 0; rep < 200; ++rep) {
        const double x = ua(rng);
        double want = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t.values()[k] <= x) want = t.grid()[k];
        }
        CHECK(psi_inverse(x, t) == want);
    }
}

TEST_CASE("inverse decreases as gamma grows") {
    const double gammas[] = {kRoot2 / 2.0, kRoot2 - 0.4, kRoot2 - 0.11, kRoot2 + 0.11, 2.0 * kRoot2};
    std::vector<PsiTable> tables;
    double amax = INFINITY;
    for (double g : gammas) {
        tables.push_back(PsiTable::build(ScaledLoss(1.0, g), 500));
        amax = std::min(amax, tables.back().values().back());
    }
    for (double frac : {0.05, 0.2, 0.5, 0.9}) {
        for (std::size_t i = 1; i < tables.size(); ++i) {
            CHECK(tables[i].inverse(frac * amax) <= tables[i - 1].inverse(frac * amax));
        }
    }
}

TEST_CASE("table csv") {
    const auto t = PsiTable::build(ScaledLoss(1.0, 1.0), 3);
    std::ostringstream out;
    t.write_csv(out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "u,psi");
    std::getline(in, line);
    CHECK(line == "0,0");
    std::getline(in, line);
    CHECK(line.rfind("0.5,", 0) == 0);
    CHECK(line.size() > 12);  // 17 significant digits
}

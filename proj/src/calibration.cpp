#include "marginpursuit/calibration.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "marginpursuit/cubic.hpp"

namespace marginpursuit {

namespace {

constexpr double kHalfKnot = kSqrt2 / 2.0;
constexpr double kIntervalSlack = 1e-12;

void check_eta(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("calibration: eta must lie in [0, 1]");
}

struct Reduced {
    double u;
    CubicCondition condition;
};

// The alpha-form double-cube coefficients multiplied through by eta > 0,
// which keeps them bounded as eta -> 0.
CubicPoly double_cube(double eta, double g) {
    const double t = 2.0 * eta - 1.0;
    return {1.0, -3.0 * g * t, 3.0 * (g * g - 2.0), t * (6.0 * g - g * g * g)};
}

// psi(u - g) = alpha psi(sqrt2), valid where u + g >= sqrt2.
CubicPoly minus_single_cube(double alpha, double g) {
    return {1.0, -3.0 * g, 3.0 * g * g - 6.0, 6.0 * (g + alpha * kPsiBound - g * g * g / 6.0)};
}

// psi(u + g) = -psi(sqrt2)/alpha, valid where u - g <= -sqrt2.
CubicPoly plus_single_cube(double alpha, double g) {
    return {1.0, 3.0 * g, 3.0 * g * g - 6.0, -6.0 * (g + kPsiBound / alpha - g * g * g / 6.0)};
}

Reduced pick_root(const CubicPoly& poly, CubicCondition cond, double lo, double hi, double eta, double g) {
    const RootSet roots = solve_cubic(poly);
    const double slack = kIntervalSlack * g;
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_res = std::numeric_limits<double>::infinity();
    for (const auto& r : roots.roots) {
        if (r.value <= lo - slack || r.value >= hi + slack) continue;
        const double u = std::fmin(std::fmax(r.value, lo), hi);
        const double res = std::fabs(first_order_residual(u, eta, g));
        if (res < best_res) {
            best_res = res;
            best = u;
        }
    }
    if (std::isnan(best)) {
        throw std::logic_error("calibration: no cubic root in (" + std::to_string(lo) + ", " + std::to_string(hi) +
                               ") for eta=" + std::to_string(eta) + ", gamma/s=" + std::to_string(g));
    }
    return {best, cond};
}

// Minimizer of C_eta at s = 1 for eta in (0, 1), eta != 1/2.
Reduced solve_reduced(double eta, double g) {
    const double alpha = (eta - 1.0) / eta;
    const bool upper = eta > 0.5;

    if (g <= kHalfKnot) {
        return pick_root(double_cube(eta, g), CubicCondition::double_cube, -g, g, eta, g);
    }
    if (g < kSqrt2) {
        const double delta = kSqrt2 - g;
        const double edge_ratio = psi(delta - g) / psi(delta + g);
        if (upper && edge_ratio < alpha) {
            return pick_root(minus_single_cube(alpha, g), CubicCondition::minus_single_cube, delta, g, eta, g);
        }
        if (!upper && edge_ratio < eta / (eta - 1.0)) {
            return pick_root(plus_single_cube(alpha, g), CubicCondition::plus_single_cube, -g, -delta, eta, g);
        }
        return pick_root(double_cube(eta, g), CubicCondition::double_cube, -g, g, eta, g);
    }
    const double delta = g - kSqrt2;
    if (upper) {
        return pick_root(minus_single_cube(alpha, g), CubicCondition::minus_single_cube, delta, g, eta, g);
    }
    return pick_root(plus_single_cube(alpha, g), CubicCondition::plus_single_cube, -g, -delta, eta, g);
}

}  // namespace

double conditional_risk(double u, double eta, const ScaledLoss& loss) {
    check_eta(eta);
    return eta * surrogate_phi(u, loss) + (1.0 - eta) * surrogate_phi(-u, loss);
}

double first_order_residual(double u_reduced, double eta, double gamma_reduced) {
    return eta * psi(gamma_reduced - u_reduced) - (1.0 - eta) * psi(gamma_reduced + u_reduced);
}

ConditionalOptimum optimal_conditional_risk(double eta, const ScaledLoss& loss) {
    check_eta(eta);
    if (!(loss.gamma() > 0.0)) throw std::invalid_argument("calibration: gamma must be positive");
    const double s = loss.s();
    const double g = loss.gamma() / s;

    Reduced r{0.0, CubicCondition::closed_form};
    if (eta == 0.0) {
        r.u = -g;
    } else if (eta == 1.0) {
        r.u = g;
    } else if (eta != 0.5) {
        r = solve_reduced(eta, g);
    }
    const double u_star = s * r.u;
    return {conditional_risk(u_star, eta, loss), u_star, r.condition};
}

double psi_transform(double u, const ScaledLoss& loss) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("psi transform: u must lie in [0, 1]");
    if (!(loss.gamma() > 0.0)) throw std::invalid_argument("psi transform: gamma must be positive");
    return surrogate_phi(0.0, loss) - optimal_conditional_risk((1.0 + u) / 2.0, loss).H;
}

PsiTable PsiTable::build(const ScaledLoss& loss, std::size_t K) {
    if (K < 2) throw std::invalid_argument("psi table: need at least two grid points");
    PsiTable t(loss);
    t.grid_.resize(K);
    t.values_.resize(K);
    const double step = 1.0 / static_cast<double>(K - 1);
    for (std::size_t k = 0; k < K; ++k) {
        t.grid_[k] = k + 1 == K ? 1.0 : static_cast<double>(k) * step;
        t.values_[k] = psi_transform(t.grid_[k], loss);
    }
    return t;
}

double PsiTable::inverse(double a) const {
    if (!(a >= 0.0)) throw std::invalid_argument("psi inverse: argument must be non-negative");
    for (std::size_t k = values_.size(); k-- > 0;) {
        if (values_[k] <= a) return grid_[k];
    }
    return grid_.front();
}

void PsiTable::write_csv(std::ostream& out) const {
    const auto old = out.precision(17);
    out << "u,psi\n";
    for (std::size_t k = 0; k < grid_.size(); ++k) out << grid_[k] << ',' << values_[k] << '\n';
    out.precision(old);
}

}  // namespace marginpursuit

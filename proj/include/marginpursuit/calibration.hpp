#pragma once
// Classification calibration of phi(u) = s^2 rho((gamma - u)/s).
//
// C_eta(u) = eta phi(u) + (1 - eta) phi(-u) is convex with a minimizer u*
// in [-gamma, gamma]; H(eta) = C_eta(u*). The transform
//   Psi(u) = s^2 rho(gamma/s) - H((1 + u)/2),  u in [0, 1]
// is convex and nondecreasing with Psi(0) = 0 and Psi(1) = s^2 rho(gamma/s).
//
// u* comes from the first-order condition
//   psi(u - g) = alpha psi(u + g),  alpha = (eta - 1)/eta,  g = gamma/s,
// solved at s = 1 and rescaled (u* = s u'). Depending on where u' +- g sit
// relative to the knots +-sqrt2 the condition is one of three cubics:
//   both arguments inside the knots         ("double-cube")
//   u + g >= sqrt2, so psi(u + g) saturates  ("minus single-cube")
//   u - g <= -sqrt2, so psi(u - g) saturates ("plus single-cube")

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "marginpursuit/loss.hpp"

namespace marginpursuit {

// Throws std::invalid_argument when eta is outside [0, 1].
double conditional_risk(double u, double eta, const ScaledLoss& loss);

enum class CubicCondition { closed_form, double_cube, minus_single_cube, plus_single_cube };

struct ConditionalOptimum {
    double H = 0.0;
    double u_star = 0.0;
    CubicCondition condition = CubicCondition::closed_form;
};

// Throws std::invalid_argument unless 0 <= eta <= 1 and gamma > 0.
// Throws std::logic_error if no cubic root lands in the admissible interval.
ConditionalOptimum optimal_conditional_risk(double eta, const ScaledLoss& loss);

// eta psi(g - u') - (1 - eta) psi(g + u') for the s = 1 reduced problem:
// zero at the optimum.
double first_order_residual(double u_reduced, double eta, double gamma_reduced);

// Throws std::invalid_argument when u is outside [0, 1] or gamma <= 0.
double psi_transform(double u, const ScaledLoss& loss);

// Psi sampled on K uniformly spaced points 0 = u_1 < ... < u_K = 1.
class PsiTable {
public:
    // Throws std::invalid_argument when K < 2.
    static PsiTable build(const ScaledLoss& loss, std::size_t K = 2500);

    const ScaledLoss& loss() const noexcept { return loss_; }
    std::size_t size() const noexcept { return grid_.size(); }
    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }

    // u_{k*} with k* = max{k : Psi(u_k) <= a}; no interpolation.
    // Throws std::invalid_argument when a < 0.
    double inverse(double a) const;

    // `u,psi` header, then one row per grid point, 17 significant digits.
    void write_csv(std::ostream& out) const;

private:
    explicit PsiTable(const ScaledLoss& loss) : loss_(loss) {}

    ScaledLoss loss_;
    std::vector<double> grid_;
    std::vector<double> values_;
};

inline PsiTable build_psi_table(const ScaledLoss& loss, std::size_t K = 2500) {
    return PsiTable::build(loss, K);
}

inline double psi_inverse(double a, const PsiTable& table) { return table.inverse(a); }

}  // namespace marginpursuit

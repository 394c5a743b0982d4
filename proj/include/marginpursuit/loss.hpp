#pragma once
// The soft-truncation influence function psi, its antiderivative rho, and
// the margin-pursuit objective built from them.
//
//   psi(u) = u - u^3/6 on [-sqrt2, sqrt2], +-2sqrt2/3 outside
//   rho(u) = u^2/2 - u^4/24 for |u| <= sqrt2, |u| 2sqrt2/3 - 1/2 otherwise
//
// rho is convex, even, non-negative and (2sqrt2/3)-Lipschitz with rho' = psi.
// Knots at +-sqrt2 belong to the polynomial branch.

#include <span>
#include <vector>

#include "marginpursuit/dataset.hpp"
#include "marginpursuit/kernels.hpp"

namespace marginpursuit {

inline constexpr double kSqrt2 = kernels::kKnot;
inline constexpr double kPsiBound = kernels::kPsiMax;  // psi(sqrt2)

double psi(double u) noexcept;
double rho(double u) noexcept;
double rho_second(double u) noexcept;

// Scale s > 0 and margin level gamma for phi(u) = s^2 rho((gamma - u)/s).
class ScaledLoss {
public:
    // Throws std::invalid_argument unless s is finite and positive.
    ScaledLoss(double s, double gamma);

    double s() const noexcept { return s_; }
    double gamma() const noexcept { return gamma_; }

    ScaledLoss with_scale(double s) const { return {s, gamma_}; }

private:
    double s_;
    double gamma_;
};

double surrogate_phi(double u, const ScaledLoss& loss) noexcept;

// h(x) = <w, x>.
struct LinearModel {
    std::vector<double> w;

    LinearModel() = default;
    explicit LinearModel(std::size_t dim) : w(dim, 0.0) {}
    explicit LinearModel(std::vector<double> weights) : w(std::move(weights)) {}

    std::size_t dim() const noexcept { return w.size(); }
    double norm() const;
    double score(std::span<const double> x) const;

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// y_i <w, x_i> for every row. Throws std::invalid_argument on dimension mismatch.
std::vector<double> margins(const LinearModel& model, const Dataset& data);

// L(w; gamma) = (s^2/n) sum_i rho((gamma - y_i <w,x_i>)/s).
// Throws std::invalid_argument on empty data or dimension mismatch.
double objective(const LinearModel& model, const Dataset& data, const ScaledLoss& loss);

// Gradient of objective():  -(s/n) sum_i psi((gamma - y_i <w,x_i>)/s) y_i x_i
std::vector<double> objective_gradient(const LinearModel& model, const Dataset& data, const ScaledLoss& loss);

// Gradient of phi(y <w,x>) for one example, accumulated as out += scale * grad.
void accumulate_point_gradient(const LinearModel& model, std::span<const double> x, double y,
                               const ScaledLoss& loss, double scale, std::span<double> out);

}  // namespace marginpursuit

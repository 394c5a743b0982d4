#pragma once
// Real roots of a u^3 + b u^2 + c u + d in closed form.
//
// Dispatch is on the discriminant
//   D = 18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2
// with D < 0: one real root (Cardano), D = 0: a triple root or a
// double/single pair, D > 0: three distinct roots (Viete's trigonometric
// form). Floating point needs a band around zero; see kZeroBand.

#include <vector>

namespace marginpursuit {

struct CubicPoly {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    double operator()(double u) const noexcept { return ((a * u + b) * u + c) * u + d; }
    double derivative(double u) const noexcept { return (3.0 * a * u + 2.0 * b) * u + c; }
    // |a| + |b| + |c| + |d|
    double coefficient_scale() const noexcept;
};

struct CubicRoot {
    double value;
    int multiplicity;  // 1, 2 or 3
};

struct RootSet {
    std::vector<CubicRoot> roots;  // ascending by value
    double discriminant = 0.0;
};

// D and b^2 - 3ac are evaluated in double-double arithmetic, accurate to
// about 1e-31 of the sum of the absolute values of their terms. |D| at most
// kZeroBand times that sum counts as D = 0, and likewise for b^2 - 3ac when
// separating the triple root. Both thresholds are homogeneous of degree 4
// (resp. 2) in the coefficients.
inline constexpr double kZeroBand = 1e-27;

// Throws std::invalid_argument when a == 0.
double discriminant(const CubicPoly& p);

// kZeroBand * (|18abcd| + |4b^3 d| + b^2 c^2 + |4ac^3| + 27 a^2 d^2)
double discriminant_band(const CubicPoly& p);

// Throws std::invalid_argument when a == 0 or a coefficient is not finite.
RootSet solve_cubic(const CubicPoly& p);

// -q/(2k^3) for the depressed cubic v^3 + p v + q with p = -3k^2: the
// cosine argument of the three-root case. Lies in (-1, 1) whenever D > 0.
// Throws std::domain_error when p >= 0.
double viete_argument(const CubicPoly& p);

// |P(r)| / ((|a|+|b|+|c|+|d|) max(1,|r|)^3)
double scaled_residual(const CubicPoly& p, double r);

}  // namespace marginpursuit

#include "marginpursuit/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace marginpursuit {

double CubicPoly::coefficient_scale() const noexcept {
    return std::fabs(a) + std::fabs(b) + std::fabs(c) + std::fabs(d);
}

namespace {

void check(const CubicPoly& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) || !std::isfinite(p.d)) {
        throw std::invalid_argument("cubic: non-finite coefficient");
    }
    if (p.a == 0.0) throw std::invalid_argument("cubic: leading coefficient is zero");
}

// One Newton step, kept only if it lowers |P|.
double polish(const CubicPoly& p, double r) {
    const double fr = p(r);
    const double dr = p.derivative(r);
    if (fr == 0.0 || dr == 0.0) return r;
    const double next = r - fr / dr;
    return std::isfinite(next) && std::fabs(p(next)) < std::fabs(fr) ? next : r;
}

// Double-double accumulator. Products are split exactly with fma, so each
// term of D carries a relative error near 2^-104 instead of 2^-52.
struct Wide {
    double hi = 0.0;
    double lo = 0.0;
};

Wide two_sum(double x, double y) {
    const double s = x + y;
    const double v = s - x;
    return {s, (x - (s - v)) + (y - v)};
}

Wide normalize(double hi, double lo) {
    const double s = hi + lo;
    return {s, lo - (s - hi)};
}

Wide operator*(Wide x, double y) {
    const double p = x.hi * y;
    const double e = std::fma(x.hi, y, -p);
    return normalize(p, e + x.lo * y);
}

Wide operator+(Wide x, Wide y) {
    const Wide s = two_sum(x.hi, y.hi);
    return normalize(s.hi, s.lo + x.lo + y.lo);
}

Wide product(std::initializer_list<double> factors) {
    Wide w{1.0, 0.0};
    for (double f : factors) w = w * f;
    return w;
}

struct DiscriminantTerms {
    Wide sum;
    double magnitude;  // sum of |term|
};

DiscriminantTerms discriminant_terms(const CubicPoly& p) {
    const auto [a, b, c, d] = p;
    const Wide terms[] = {product({18.0, a, b, c, d}), product({-4.0, b, b, b, d}), product({b, b, c, c}),
                          product({-4.0, a, c, c, c}), product({-27.0, a, a, d, d})};
    DiscriminantTerms out{{}, 0.0};
    for (const Wide& t : terms) {
        out.sum = out.sum + t;
        out.magnitude += std::fabs(t.hi);
    }
    return out;
}

}  // namespace

double discriminant(const CubicPoly& p) {
    check(p);
    const Wide d = discriminant_terms(p).sum;
    return d.hi + d.lo;
}

double discriminant_band(const CubicPoly& p) {
    check(p);
    return kZeroBand * discriminant_terms(p).magnitude;
}

RootSet solve_cubic(const CubicPoly& p) {
    check(p);
    const auto [a, b, c, d] = p;
    RootSet out;

    const DiscriminantTerms terms = discriminant_terms(p);
    out.discriminant = terms.sum.hi + terms.sum.lo;
    const Wide wide_delta0 = product({b, b}) + product({-3.0, a, c});
    const double delta0 = wide_delta0.hi + wide_delta0.lo;

    if (std::fabs(out.discriminant) <= kZeroBand * terms.magnitude) {
        if (std::fabs(delta0) <= kZeroBand * (b * b + std::fabs(3.0 * a * c))) {
            out.roots.push_back({-b / (3.0 * a), 3});
        } else {
            const double dbl = polish(p, (9.0 * a * d - b * c) / (2.0 * delta0));
            const double single = polish(p, (4.0 * a * b * c - 9.0 * a * a * d - b * b * b) / (a * delta0));
            out.roots.push_back({dbl, 2});
            out.roots.push_back({single, 1});
        }
    } else if (out.discriminant < 0.0) {
        const double delta1 = 2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d;
        const double root = std::sqrt(delta1 * delta1 - 4.0 * delta0 * delta0 * delta0);
        // Take the branch that adds magnitudes; the other cancels when
        // delta0 ~ 0 and would leave C ~ 0.
        const double inner = delta1 >= 0.0 ? delta1 + root : delta1 - root;
        const double C = inner >= 0.0 ? std::pow(inner / 2.0, 1.0 / 3.0)
                                      : -std::pow(std::fabs(inner) / 2.0, 1.0 / 3.0);
        const double u = -(b + C + delta0 / C) / (3.0 * a);
        out.roots.push_back({polish(p, u), 1});
    } else {
        const double pp = (3.0 * a * c - b * b) / (3.0 * a * a);
        const double qq = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
        const double k = std::sqrt(std::max(-pp / 3.0, 0.0));
        const double e = std::clamp(-qq / (2.0 * k * k * k), -1.0, 1.0);
        const double x = std::acos(e) / 3.0;
        const double shift = b / (3.0 * a);
        constexpr double third_turn = 2.0 * std::numbers::pi / 3.0;
        for (double angle : {x, third_turn + x, third_turn - x}) {
            out.roots.push_back({polish(p, 2.0 * k * std::cos(angle) - shift), 1});
        }
    }

    std::sort(out.roots.begin(), out.roots.end(),
              [](const CubicRoot& l, const CubicRoot& r) { return l.value < r.value; });
    return out;
}

double viete_argument(const CubicPoly& p) {
    check(p);
    const auto [a, b, c, d] = p;
    const double pp = (3.0 * a * c - b * b) / (3.0 * a * a);
    const double qq = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    if (!(pp < 0.0)) throw std::domain_error("cubic: depressed coefficient p is not negative");
    const double k = std::sqrt(-pp / 3.0);
    return -qq / (2.0 * k * k * k);
}

double scaled_residual(const CubicPoly& p, double r) {
    const double m = std::max(1.0, std::fabs(r));
    return std::fabs(p(r)) / (p.coefficient_scale() * m * m * m);
}

}  // namespace marginpursuit

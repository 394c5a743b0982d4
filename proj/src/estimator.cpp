#include "marginpursuit/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "marginpursuit/kernels.hpp"

namespace marginpursuit {

MarginSample::MarginSample(std::vector<double> q) : q_(std::move(q)) {
    if (q_.empty()) throw std::invalid_argument("margin sample: empty");
    for (double v : q_) {
        if (!std::isfinite(v)) throw std::invalid_argument("margin sample: non-finite margin");
    }
    const auto [lo, hi] = std::minmax_element(q_.begin(), q_.end());
    min_ = *lo;
    max_ = *hi;
}

double catoni_residual(std::span<const double> q, double theta, double s) {
    const auto& k = kernels::active();
    std::vector<double> r(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) r[i] = (theta - q[i]) / s;
    k.psi(r.data(), r.data(), r.size());
    return k.sum(r.data(), r.size()) / static_cast<double>(q.size());
}

CatoniEstimate catoni_estimate(const MarginSample& q, double s, double tol, int max_iterations) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("catoni: s must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("catoni: tol must be non-negative");

    const auto values = q.values();
    double lo = q.min();
    double hi = q.max();
    double f_lo = catoni_residual(values, lo, s);
    if (std::fabs(f_lo) <= tol || lo == hi) return {lo, f_lo, 0};
    double f_hi = catoni_residual(values, hi, s);
    if (std::fabs(f_hi) <= tol) return {hi, f_hi, 0};

    CatoniEstimate best = std::fabs(f_lo) <= std::fabs(f_hi) ? CatoniEstimate{lo, f_lo, 0}
                                                              : CatoniEstimate{hi, f_hi, 0};
    for (int it = 1; it <= max_iterations; ++it) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        const double f = catoni_residual(values, mid, s);
        if (std::fabs(f) < std::fabs(best.residual)) best = {mid, f, it};
        best.iterations = it;
        if (std::fabs(f) <= tol) return {mid, f, it};
        if (f < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

double stability_radius(std::size_t n, double s) {
    if (n == 0) throw std::invalid_argument("stability radius: n must be positive");
    return s / std::sqrt(static_cast<double>(n));
}

double scale_from_variance(double v, double k, double gamma) {
    if (!(v >= 0.0)) throw std::invalid_argument("scale: variance bound must be non-negative");
    if (!(k > 0.0)) throw std::invalid_argument("scale: k must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("scale: gamma must be positive");
    return v * k / gamma;
}

double lower_quantile(std::span<const double> values, double level) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile: level must lie in (0, 1)");
    std::vector<double> sorted(values.begin(), values.end());
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

double scale_from_quantile(const MarginSample& q, double lambda, double delta, double level) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale: lambda must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("scale: delta must lie in (0, 1)");
    std::vector<double> mags(q.values().begin(), q.values().end());
    for (double& m : mags) m = std::fabs(m);
    const double v = lower_quantile(mags, level);
    const double n = static_cast<double>(q.size());
    return std::sqrt(n * v / (2.0 * lambda * std::log(1.0 / delta)));
}

double pointwise_bound_scale(double v, std::size_t n, double delta) {
    if (!(v > 0.0)) throw std::invalid_argument("scale: variance bound must be positive");
    if (n == 0) throw std::invalid_argument("scale: n must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("scale: delta must lie in (0, 1)");
    return std::sqrt(static_cast<double>(n) * v / (2.0 * std::log(2.0 / delta)));
}

double pointwise_bound_radius(double v, std::size_t n, double delta) {
    if (!(v >= 0.0) || n == 0 || !(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("bound radius: invalid arguments");
    }
    return std::sqrt(2.0 * v * std::log(2.0 / delta) / static_cast<double>(n));
}

}  // namespace marginpursuit

#pragma once
// Catoni-type location estimate of a margin sample and the rules used to
// pick the scale s.
//
// The estimate is a root of  theta -> (1/n) sum_i psi((theta - q_i)/s),
// which is continuous and nondecreasing, negative-or-zero at min(q) and
// positive-or-zero at max(q). Small s pushes the root to the sample median,
// large s to the sample mean (deviation O(1/s^2)).

#include <cstddef>
#include <span>
#include <vector>

namespace marginpursuit {

// Margins q_i = y_i h(x_i). Nonempty, all finite.
class MarginSample {
public:
    // Throws std::invalid_argument on an empty or non-finite sample.
    explicit MarginSample(std::vector<double> q);

    std::span<const double> values() const noexcept { return q_; }
    std::size_t size() const noexcept { return q_.size(); }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::vector<double> q_;
    double min_ = 0.0;
    double max_ = 0.0;
};

struct CatoniEstimate {
    double value = 0.0;
    double residual = 0.0;  // (1/n) sum_i psi((value - q_i)/s)
    int iterations = 0;
};

inline constexpr double kDefaultCatoniTol = 1e-10;
inline constexpr int kCatoniMaxIterations = 200;

// Mean influence (1/n) sum_i psi((theta - q_i)/s).
double catoni_residual(std::span<const double> q, double theta, double s);

// Bisection on [min q, max q] until |residual| <= tol. If the bracket
// collapses to adjacent doubles first (tol below what the arithmetic can
// resolve), the better endpoint is returned with its residual. When the
// residual has a flat zero region any point of it is a valid answer.
// Throws std::invalid_argument unless s > 0 and tol >= 0.
CatoniEstimate catoni_estimate(const MarginSample& q, double s, double tol = kDefaultCatoniTol,
                               int max_iterations = kCatoniMaxIterations);

// s / sqrt(n): displacement bound for the estimate when one margin is
// replaced arbitrarily, valid once half the sample lies within s/sqrt2 of it
// and n/2 >= 24.
double stability_radius(std::size_t n, double s);

// v k / gamma: the smallest scale keeping the bias below gamma/k given a
// variance bound v. Throws unless v >= 0, k > 0, gamma > 0.
double scale_from_variance(double v, double k, double gamma);

// Lower nearest-rank quantile: the ceil(level * n)-th smallest value
// (1-based, clamped to [1, n]). Throws unless 0 < level < 1 and values is nonempty.
double lower_quantile(std::span<const double> values, double level);

// sqrt(n v / (2 lambda log(1/delta))) with v the `level` quantile of |q_i|.
// Throws unless lambda > 0, 0 < delta < 1 and 0 < level < 1.
double scale_from_quantile(const MarginSample& q, double lambda, double delta, double level = 0.75);

// sqrt(n v / (2 log(2/delta))): the scale minimizing the pointwise
// deviation bound, under which |estimate - mean| <= sqrt(2 v log(2/delta)/n)
// with probability at least 1 - delta. Throws unless v > 0, n >= 1, 0 < delta < 1.
double pointwise_bound_scale(double v, std::size_t n, double delta);

// sqrt(2 v log(2/delta) / n).
double pointwise_bound_radius(double v, std::size_t n, double delta);

}  // namespace marginpursuit

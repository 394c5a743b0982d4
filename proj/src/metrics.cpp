#include "marginpursuit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "marginpursuit/estimator.hpp"

namespace marginpursuit {

namespace {

double nearest_rank(const std::vector<double>& sorted, double level) {
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
    return sorted[std::clamp<std::size_t>(rank, 1, n) - 1];
}

}  // namespace

MarginStats margin_stats(std::span<const double> q, double s) {
    if (q.empty()) throw std::invalid_argument("margin stats: empty sample");
    std::vector<double> sorted(q.begin(), q.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(q.size());

    MarginStats st;
    double total = 0.0;
    for (double v : q) total += v;
    st.mean = total / n;
    double ss = 0.0;
    for (double v : q) ss += (v - st.mean) * (v - st.mean);
    st.variance = ss / n;
    st.min = sorted.front();
    st.max = sorted.back();
    st.q25 = nearest_rank(sorted, 0.25);
    st.median = nearest_rank(sorted, 0.5);
    st.q75 = nearest_rank(sorted, 0.75);
    st.catoni_location = catoni_estimate(MarginSample(std::move(sorted)), s).value;
    return st;
}

MarginStats margin_stats(const LinearModel& model, const Dataset& data, const ScaledLoss& loss) {
    if (data.empty()) throw std::invalid_argument("margin stats: empty dataset");
    const auto m = margins(model, data);
    return margin_stats(m, loss.s());
}

double misclassification_error(const LinearModel& model, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("error: empty dataset");
    const auto m = margins(model, data);
    const auto wrong = std::count_if(m.begin(), m.end(), [](double v) { return v <= 0.0; });
    return static_cast<double>(wrong) / static_cast<double>(m.size());
}

}  // namespace marginpursuit

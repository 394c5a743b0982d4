#include "marginpursuit/trainer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "marginpursuit/estimator.hpp"
#include "marginpursuit/kernels.hpp"

namespace marginpursuit {

namespace {

// Index stream for example sampling; decorrelated from the init stream.
constexpr std::uint64_t kSamplingSalt = 0x9e3779b97f4a7c15ULL;

void require_data(const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
}

void require_lambda(const TrainConfig& cfg) {
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("train: this schedule needs lambda > 0");
}

LinearModel starting_point(const Dataset& data, const TrainConfig& cfg) {
    if (cfg.initial) {
        if (cfg.initial->dim() != data.dim()) throw std::invalid_argument("train: initial model dimension mismatch");
        return *cfg.initial;
    }
    return random_initial_model(data.dim(), cfg.seed);
}

class Recorder {
public:
    Recorder(const Dataset& train, const Dataset* test, std::size_t every)
        : train_(train), test_(test), every_(every == 0 ? train.size() : every) {}

    bool due(std::size_t cost) const { return cost >= next_; }

    void record(std::size_t cost, const LinearModel& w, const ScaledLoss& loss) {
        Checkpoint c;
        c.cost = cost;
        c.s = loss.s();
        c.objective = objective(w, train_, loss);
        c.train_error = misclassification_error(w, train_);
        if (test_ != nullptr && !test_->empty()) c.test_error = misclassification_error(w, *test_);
        c.margins = margin_stats(w, train_, loss);
        trace_.checkpoints.push_back(c);
        last_ = cost;
        while (next_ <= cost) next_ += every_;
    }

    void finish(std::size_t cost, const LinearModel& w, const ScaledLoss& loss) {
        if (trace_.checkpoints.empty() || last_ != cost) record(cost, w, loss);
    }

    TrainTrace take() { return std::move(trace_); }

private:
    const Dataset& train_;
    const Dataset* test_;
    std::size_t every_;
    std::size_t next_ = 0;
    std::size_t last_ = 0;
    TrainTrace trace_;
};

double population_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size());
}

}  // namespace

LinearModel random_initial_model(std::size_t dim, std::uint64_t seed) {
    LinearModel m(dim);
    if (dim == 0) return m;
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (double& v : m.w) v = unif(rng);
    return m;
}

LinearModel project_ball(const LinearModel& w, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("project: radius must be positive");
    const double norm = w.norm();
    if (norm <= r) return w;
    // r / norm can round up far enough that the scaled norm lands an ulp
    // outside the ball; shrink the factor until it is inside.
    double f = r / norm;
    for (;;) {
        LinearModel out = w;
        for (double& v : out.w) v *= f;
        if (out.norm() <= r) return out;
        f = std::nextafter(f, 0.0);
    }
}

LinearModel gd_step(const LinearModel& w, const Dataset& data, const ScaledLoss& loss, double alpha) {
    const auto grad = objective_gradient(w, data, loss);
    LinearModel out = w;
    kernels::axpy(-alpha, grad, out.w);
    return out;
}

LinearModel gd_step(const LinearModel& w, const Dataset& data, const TrainConfig& cfg) {
    return gd_step(w, data, cfg.loss, cfg.step);
}

TrainResult train_batch(const Dataset& data, const TrainConfig& cfg, const Dataset* test) {
    require_data(data);
    if (cfg.iterations < 1) throw std::invalid_argument("train: iterations must be at least 1");
    if (!(cfg.step >= 0.0)) throw std::invalid_argument("train: step must be non-negative");
    LinearModel w = starting_point(data, cfg);

    ScaledLoss loss = cfg.loss;
    if (cfg.batch_scale == BatchScale::variance) {
        const double v = cfg.variance_inflation * population_variance(margins(w, data));
        const double rule = scale_from_variance(v, cfg.k_bias, loss.gamma());
        if (rule > loss.s()) loss = loss.with_scale(rule);
    }

    Recorder rec(data, test, data.size());
    rec.record(0, w, loss);
    const std::size_t n = data.size();
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        w = gd_step(w, data, loss, cfg.step);
        rec.record((t + 1) * n, w, loss);
    }
    return {std::move(w), rec.take()};
}

TrainResult train_stochastic(const Dataset& data, const TrainConfig& cfg, const Dataset* test) {
    require_data(data);
    require_lambda(cfg);
    LinearModel w = starting_point(data, cfg);
    ScaledLoss loss = cfg.loss;
    const double radius = 1.0 / std::sqrt(cfg.lambda);
    const double root_lambda = std::sqrt(cfg.lambda);

    std::mt19937_64 rng(cfg.seed ^ kSamplingSalt);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<double> grad(data.dim());

    Recorder rec(data, test, cfg.checkpoint_every);
    rec.record(0, w, loss);
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        if (cfg.rescale_at && *cfg.rescale_at == t) {
            const double rescaled = scale_from_quantile(MarginSample(margins(w, data)), cfg.lambda, cfg.delta,
                                                        cfg.rescale_quantile);
            if (rescaled > loss.s()) loss = loss.with_scale(rescaled);
        }
        const std::size_t i = pick(rng);
        const double alpha = 1.0 / (loss.s() * root_lambda * static_cast<double>(t + 1));
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = cfg.lambda * w.w[j];
        accumulate_point_gradient(w, data.row(i), data.label(i), loss, 1.0, grad);
        kernels::axpy(-alpha, grad, w.w);
        w = project_ball(w, radius);
        if (rec.due(t + 1)) rec.record(t + 1, w, loss);
    }
    rec.finish(cfg.iterations, w, loss);
    return {std::move(w), rec.take()};
}

TrainResult pegasos_train(const Dataset& data, const TrainConfig& cfg, const Dataset* test) {
    require_data(data);
    require_lambda(cfg);
    LinearModel w = starting_point(data, cfg);
    const double radius = 1.0 / std::sqrt(cfg.lambda);

    std::mt19937_64 rng(cfg.seed ^ kSamplingSalt);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);

    Recorder rec(data, test, cfg.checkpoint_every);
    rec.record(0, w, cfg.loss);
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        const std::size_t i = pick(rng);
        const auto x = data.row(i);
        const double y = data.label(i);
        const double eta = 1.0 / (cfg.lambda * static_cast<double>(t + 1));
        const bool active = y * kernels::dot(w.w, x) < 1.0;
        const double shrink = 1.0 - eta * cfg.lambda;
        for (double& v : w.w) v *= shrink;
        if (active) kernels::axpy(eta * y, x, w.w);
        w = project_ball(w, radius);
        if (rec.due(t + 1)) rec.record(t + 1, w, cfg.loss);
    }
    rec.finish(cfg.iterations, w, cfg.loss);
    return {std::move(w), rec.take()};
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const Dataset* test) {
    if (cfg.algorithm == Algorithm::pegasos) return pegasos_train(data, cfg, test);
    if (cfg.mode == Mode::batch) return train_batch(data, cfg, test);
    return train_stochastic(data, cfg, test);
}

}  // namespace marginpursuit

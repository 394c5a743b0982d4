#pragma once
// Training loops for linear classifiers.
//
//   batch margin pursuit   w <- w + (s alpha / n) sum_i psi((gamma - y_i<w,x_i>)/s) y_i x_i
//   stochastic variant     one uniformly drawn example per step, l2 penalty
//                          (lambda/2)|w|^2, step 1/(s sqrt(lambda) (1+t)),
//                          projection onto the 1/sqrt(lambda) ball
//   Pegasos                hinge subgradient, step 1/(lambda (1+t)), same projection
//
// Cost is counted in per-example gradients: a batch step costs n, a
// stochastic step 1. Checkpoints are recorded at cost 0 and then every
// `checkpoint_every` gradients (default: n), plus the final iterate.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "marginpursuit/dataset.hpp"
#include "marginpursuit/loss.hpp"
#include "marginpursuit/metrics.hpp"

namespace marginpursuit {

enum class Algorithm { margin_pursuit, pegasos };
enum class Mode { batch, stochastic };

// How train_batch fixes s before its first step.
enum class BatchScale {
    fixed,     // use loss.s() as given
    variance,  // max(loss.s(), inflation * Var(initial margins) * k / gamma)
};

struct TrainConfig {
    ScaledLoss loss{1.0, 1.0};
    double k_bias = 2.0;
    BatchScale batch_scale = BatchScale::fixed;
    double variance_inflation = 1.5;
    double step = 0.1;  // fixed alpha for batch mode
    double lambda = 0.0;
    std::size_t iterations = 100;
    std::uint64_t seed = 0;
    Mode mode = Mode::stochastic;
    Algorithm algorithm = Algorithm::margin_pursuit;
    std::optional<std::size_t> rescale_at;  // stochastic step index of the one-shot rescale
    double delta = 0.05;
    double rescale_quantile = 0.75;
    std::size_t checkpoint_every = 0;  // 0: training set size
    std::optional<LinearModel> initial;  // otherwise drawn from `seed`
};

struct Checkpoint {
    std::size_t cost = 0;
    double s = 0.0;
    double objective = 0.0;
    double train_error = 0.0;
    double test_error = std::numeric_limits<double>::quiet_NaN();
    MarginStats margins;
};

struct TrainTrace {
    std::vector<Checkpoint> checkpoints;
};

struct TrainResult {
    LinearModel model;
    TrainTrace trace;
};

// i.i.d. uniform on [-1/sqrt(d), 1/sqrt(d)].
LinearModel random_initial_model(std::size_t dim, std::uint64_t seed);

// w if |w| <= r, else (r/|w|) w. Throws std::invalid_argument unless r > 0.
LinearModel project_ball(const LinearModel& w, double r);

// One full-batch step, identical to w - alpha * objective_gradient(w).
LinearModel gd_step(const LinearModel& w, const Dataset& data, const ScaledLoss& loss, double alpha);
LinearModel gd_step(const LinearModel& w, const Dataset& data, const TrainConfig& cfg);

// The `test` set, when given, only feeds the test_error column.
TrainResult train_batch(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr);
TrainResult train_stochastic(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr);
TrainResult pegasos_train(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr);

// Dispatch on cfg.algorithm and cfg.mode.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr);

}  // namespace marginpursuit

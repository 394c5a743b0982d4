#pragma once
// Multi-trial experiments: balanced train/test draws, a lambda sweep per
// algorithm, per-run and trial-averaged traces, and best-lambda selection
// by the lowest averaged test error reached at any checkpoint.
//
// Files written under output_dir:
//   runs/<algorithm>_lam<lambda>_trial<k>.csv   one per (algorithm, lambda, trial)
//   <algorithm>_lam<lambda>_mean.csv            checkpoint-wise means over trials
//   best_lambda.csv                             algorithm,lambda,best_test_err,best_cost
// Trace files share the column set in kTraceHeader. Floats carry 17
// significant digits; lambda in file names uses %.2e.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marginpursuit/dataset.hpp"
#include "marginpursuit/trainer.hpp"

namespace marginpursuit {

inline constexpr std::string_view kTraceHeader =
    "cost,s,objective,train_err,test_err,mean,var,median,q25,q75,min,max,catoni";

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct ExperimentConfig {
    std::optional<LoaderConfig> loader;  // ignored when `dataset` is set
    std::optional<Dataset> dataset;
    SplitSpec split;  // split.seed is replaced per trial
    std::vector<Algorithm> algorithms{Algorithm::margin_pursuit, Algorithm::pegasos};
    std::vector<double> lambdas{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    Mode mode = Mode::stochastic;  // margin pursuit only; Pegasos is always stochastic
    double gamma = 1.0;
    double initial_scale = 1.0;
    double k_bias = 2.0;
    double step = 0.1;  // batch mode
    std::size_t epochs = 20;  // iterations = epochs * n_train (stochastic) or epochs (batch)
    std::optional<std::size_t> rescale_at_epoch;
    double delta = 0.05;
    std::size_t trials = 25;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output_dir = "out";

    // Keys: dataset keys of LoaderConfig plus n_train, balance, size_cap_ratio,
    // algorithms, lambdas, mode, gamma, scale, k_bias, step, epochs,
    // rescale_at_epoch, delta, trials, seed, workers, output_dir.
    static ExperimentConfig from(const KeyValueConfig& kv);
};

struct RunSummary {
    Algorithm algorithm;
    double lambda;
    std::vector<TrainTrace> trials;
    TrainTrace mean;
};

struct BestLambda {
    Algorithm algorithm;
    double lambda;
    double best_test_error;
    std::size_t best_cost;
};

struct ExperimentResult {
    std::vector<RunSummary> runs;
    std::vector<BestLambda> best;
    std::vector<std::string> files;
};

// Derived per-trial seeds; identical for all algorithms and lambdas so their
// splits, initial points and sampling sequences line up.
std::uint64_t trial_seed(std::uint64_t base, std::size_t trial);

// Checkpoint-wise arithmetic mean. Throws if the traces' cost axes differ.
TrainTrace average_traces(const std::vector<TrainTrace>& traces);

// Lowest test error over all checkpoints of each lambda's mean trace; ties
// go to the lambda listed first.
std::vector<BestLambda> select_best_lambda(const std::vector<RunSummary>& runs);

void write_trace_csv(std::ostream& out, const TrainTrace& trace);
void write_best_csv(std::ostream& out, const std::vector<BestLambda>& best);

std::string format_lambda(double lambda);

// Runs every (algorithm, lambda, trial) job, writes the files above and
// returns the same data. Throws std::runtime_error naming the failing trial.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace marginpursuit

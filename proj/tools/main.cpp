// Command-line front end: single training runs, config-driven experiments,
// Psi-transform tables and a cubic root debugger. Everything written to
// stdout or files is CSV with a header row.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "marginpursuit/calibration.hpp"
#include "marginpursuit/cubic.hpp"
#include "marginpursuit/dataset.hpp"
#include "marginpursuit/harness.hpp"
#include "marginpursuit/kernels.hpp"
#include "marginpursuit/trainer.hpp"

namespace mp = marginpursuit;

namespace {

// Flags that mirror config keys. Values given on the command line override
// the file.
class ConfigFlags {
public:
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option(flag, values_[key], help);
    }

    mp::KeyValueConfig merge(const std::string& path) const {
        mp::KeyValueConfig kv = path.empty() ? mp::KeyValueConfig{} : mp::KeyValueConfig::load(path);
        for (const auto& [key, value] : values_) {
            if (!value.empty()) kv.set(key, value);
        }
        return kv;
    }

private:
    std::map<std::string, std::string> values_;
};

void add_common_flags(CLI::App* app, ConfigFlags& flags) {
    flags.add(app, "--data", "path", "Dataset file (LIBSVM or CSV)");
    flags.add(app, "--format", "format", "libsvm or csv (default: by extension)");
    flags.add(app, "--positive-label", "positive_label", "Raw label mapped to +1");
    flags.add(app, "--positive-above", "positive_above", "Raw labels above this map to +1");
    flags.add(app, "--minmax", "minmax", "true to min-max scale features");
    flags.add(app, "--n-train", "n_train", "Training set size");
    flags.add(app, "--balance", "balance", "Positive fraction of the training set");
    flags.add(app, "--size-cap-ratio", "size_cap_ratio", "Require n_train <= ratio * d (<= 0 disables)");
    flags.add(app, "--mode", "mode", "batch or stochastic");
    flags.add(app, "--gamma", "gamma", "Margin level");
    flags.add(app, "--scale", "scale", "Initial scale s");
    flags.add(app, "--k-bias", "k_bias", "Bias constant of the variance scale rule");
    flags.add(app, "--step", "step", "Batch step size");
    flags.add(app, "--epochs", "epochs", "Passes over the training set");
    flags.add(app, "--rescale-at-epoch", "rescale_at_epoch", "Epoch of the one-shot quantile rescale");
    flags.add(app, "--delta", "delta", "Confidence level of the rescale rule");
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path);
    return file;
}

int run_train(const std::string& config_path, const ConfigFlags& flags, const std::string& algorithm,
              double lambda, std::uint64_t seed, const std::string& output, const std::string& weights) {
    const mp::KeyValueConfig kv = flags.merge(config_path);
    const mp::ExperimentConfig ec = mp::ExperimentConfig::from(kv);
    if (!ec.loader) throw std::invalid_argument("train: no dataset given (--data or path in --config)");
    const mp::Dataset full = mp::load_dataset(*ec.loader);

    mp::Dataset train_set = full;
    std::optional<mp::Dataset> test_set;
    if (ec.split.n_train > 0) {
        mp::SplitSpec split = ec.split;
        split.seed = seed;
        mp::Split s = mp::balanced_subsample(full, split);
        train_set = std::move(s.train);
        test_set = std::move(s.test);
    }

    mp::TrainConfig tc;
    tc.loss = mp::ScaledLoss(ec.initial_scale, ec.gamma);
    tc.k_bias = ec.k_bias;
    tc.lambda = lambda;
    tc.seed = seed;
    tc.delta = ec.delta;
    tc.step = ec.step;
    tc.algorithm = mp::parse_algorithm(algorithm);
    const std::size_t n = train_set.size();
    if (tc.algorithm == mp::Algorithm::margin_pursuit && ec.mode == mp::Mode::batch) {
        tc.mode = mp::Mode::batch;
        tc.iterations = ec.epochs;
    } else {
        tc.mode = mp::Mode::stochastic;
        tc.iterations = ec.epochs * n;
        if (ec.rescale_at_epoch) tc.rescale_at = *ec.rescale_at_epoch * n;
    }

    const mp::TrainResult result = mp::train(train_set, tc, test_set ? &*test_set : nullptr);
    std::ofstream file;
    mp::write_trace_csv(open_output(output, file), result.trace);
    if (!weights.empty()) {
        std::ofstream w(weights, std::ios::binary);
        if (!w) throw std::runtime_error("cannot write " + weights);
        w.precision(17);
        w << "index,weight\n";
        for (std::size_t j = 0; j < result.model.dim(); ++j) w << j << ',' << result.model.w[j] << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Margin-pursuit linear classification"};
    app.require_subcommand(1);
    bool show_isa = false;
    app.add_flag("--isa", show_isa, "Print the selected SIMD kernel set to stderr");

    // train
    auto* train = app.add_subcommand("train", "Single training run; writes the checkpoint trace");
    std::string train_config, train_output, train_weights, algorithm = "margin_pursuit";
    double lambda = 1e-3;
    std::uint64_t train_seed = 0;
    ConfigFlags train_flags;
    train->add_option("--config", train_config, "Key-value config file")->check(CLI::ExistingFile);
    train->add_option("--algorithm", algorithm, "margin_pursuit or pegasos");
    train->add_option("--lambda", lambda, "Regularization weight");
    train->add_option("--seed", train_seed, "Seed for split, initial point and sampling");
    train->add_option("-o,--output", train_output, "Trace CSV (default stdout)");
    train->add_option("--weights", train_weights, "Write final weights as CSV");
    add_common_flags(train, train_flags);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Lambda sweep over repeated trials");
    std::string exp_config;
    std::uint64_t exp_seed = 0;
    ConfigFlags exp_flags;
    experiment->add_option("--config", exp_config, "Key-value config file")->required()->check(CLI::ExistingFile);
    experiment->add_option("--seed", exp_seed, "Base seed")->required();
    add_common_flags(experiment, exp_flags);
    exp_flags.add(experiment, "--algorithms", "algorithms", "Comma-separated algorithm list");
    exp_flags.add(experiment, "--lambdas", "lambdas", "Comma-separated lambda sweep");
    exp_flags.add(experiment, "--trials", "trials", "Number of trials");
    exp_flags.add(experiment, "--workers", "workers", "Concurrent trial jobs");
    exp_flags.add(experiment, "--output-dir", "output_dir", "Directory for CSV output");

    // psi-table
    auto* table = app.add_subcommand("psi-table", "Tabulate the Psi-transform on [0, 1]");
    double table_s = 1.0, table_gamma = 1.0;
    std::size_t table_k = 2500;
    std::string table_output;
    table->add_option("--s", table_s, "Scale");
    table->add_option("--gamma", table_gamma, "Margin level");
    table->add_option("--K", table_k, "Grid size");
    table->add_option("-o,--output", table_output, "CSV path (default stdout)");

    // solve-cubic
    auto* cubic = app.add_subcommand("solve-cubic", "Real roots of a u^3 + b u^2 + c u + d");
    std::vector<double> coef;
    cubic->add_option("coefficients", coef, "a b c d")->expected(4)->required()->allow_extra_args(false);

    // make-fixture
    auto* fixture = app.add_subcommand("make-fixture", "Write a two-Gaussian separable dataset");
    std::size_t fx_n = 200, fx_d = 5;
    double fx_sep = 2.0, fx_gap = 0.5;
    std::uint64_t fx_seed = 0;
    std::string fx_format = "csv", fx_output;
    fixture->add_option("--n", fx_n, "Number of points");
    fixture->add_option("--d", fx_d, "Dimension");
    fixture->add_option("--separation", fx_sep, "Class mean offset along the first axis");
    fixture->add_option("--gap", fx_gap, "Minimum margin along the first axis");
    fixture->add_option("--seed", fx_seed, "Seed")->required();
    fixture->add_option("--format", fx_format, "csv or libsvm")->check(CLI::IsMember({"csv", "libsvm"}));
    fixture->add_option("-o,--output", fx_output, "Output path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    if (show_isa) std::cerr << "kernels: " << mp::kernels::isa_name(mp::kernels::active().isa) << '\n';

    try {
        if (*train) {
            return run_train(train_config, train_flags, algorithm, lambda, train_seed, train_output, train_weights);
        }
        if (*experiment) {
            mp::KeyValueConfig kv = exp_flags.merge(exp_config);
            kv.set("seed", std::to_string(exp_seed));
            const auto result = mp::run_experiment(mp::ExperimentConfig::from(kv));
            std::cout.precision(17);
            mp::write_best_csv(std::cout, result.best);
            return 0;
        }
        if (*table) {
            const auto t = mp::PsiTable::build(mp::ScaledLoss(table_s, table_gamma), table_k);
            std::ofstream file;
            t.write_csv(open_output(table_output, file));
            return 0;
        }
        if (*cubic) {
            const auto roots = mp::solve_cubic({coef[0], coef[1], coef[2], coef[3]});
            std::cout.precision(17);
            std::cout << "root,multiplicity\n";
            for (const auto& r : roots.roots) std::cout << r.value << ',' << r.multiplicity << '\n';
            return 0;
        }
        if (*fixture) {
            const auto data = mp::two_gaussian_fixture(fx_n, fx_d, fx_sep, fx_gap, fx_seed);
            std::ofstream file;
            auto& out = open_output(fx_output, file);
            if (fx_format == "csv") {
                mp::write_csv(out, data);
            } else {
                mp::write_libsvm(out, data);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

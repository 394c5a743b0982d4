#include "marginpursuit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace marginpursuit {

std::string_view algorithm_name(Algorithm a) {
    return a == Algorithm::pegasos ? "pegasos" : "margin_pursuit";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "margin_pursuit") return Algorithm::margin_pursuit;
    if (name == "pegasos") return Algorithm::pegasos;
    throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

std::size_t count_or(const KeyValueConfig& kv, const std::string& key, std::size_t fallback) {
    const double v = kv.number_or(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument("config: '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    if (kv.has("path")) cfg.loader = LoaderConfig::from(kv);
    cfg.split.n_train = count_or(kv, "n_train", 0);
    cfg.split.balance = kv.number_or("balance", cfg.split.balance);
    cfg.split.size_cap_ratio = kv.number_or("size_cap_ratio", cfg.split.size_cap_ratio);
    if (const auto algs = kv.get("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& a : split_list(*algs)) cfg.algorithms.push_back(parse_algorithm(a));
    }
    if (const auto lams = kv.get("lambdas")) {
        cfg.lambdas.clear();
        for (const auto& l : split_list(*lams)) {
            KeyValueConfig one;
            one.set("l", l);
            cfg.lambdas.push_back(one.number_or("l", 0.0));
        }
    }
    const auto mode = kv.get_or("mode", "stochastic");
    if (mode == "batch") {
        cfg.mode = Mode::batch;
    } else if (mode != "stochastic") {
        throw std::invalid_argument("config: mode must be batch or stochastic");
    }
    cfg.gamma = kv.number_or("gamma", cfg.gamma);
    cfg.initial_scale = kv.number_or("scale", cfg.initial_scale);
    cfg.k_bias = kv.number_or("k_bias", cfg.k_bias);
    cfg.step = kv.number_or("step", cfg.step);
    cfg.epochs = count_or(kv, "epochs", cfg.epochs);
    if (kv.has("rescale_at_epoch")) cfg.rescale_at_epoch = count_or(kv, "rescale_at_epoch", 0);
    cfg.delta = kv.number_or("delta", cfg.delta);
    cfg.trials = count_or(kv, "trials", cfg.trials);
    cfg.seed = static_cast<std::uint64_t>(count_or(kv, "seed", 0));
    cfg.workers = count_or(kv, "workers", cfg.workers);
    cfg.output_dir = kv.get_or("output_dir", cfg.output_dir);
    if (cfg.trials < 1) throw std::invalid_argument("config: trials must be at least 1");
    return cfg;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) {
    return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(trial)));
}

TrainTrace average_traces(const std::vector<TrainTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("average: no traces");
    TrainTrace mean = traces.front();
    const double k = static_cast<double>(traces.size());
    for (std::size_t c = 0; c < mean.checkpoints.size(); ++c) {
        Checkpoint acc{};
        acc.test_error = 0.0;
        acc.cost = traces.front().checkpoints[c].cost;
        for (const auto& t : traces) {
            if (t.checkpoints.size() != mean.checkpoints.size() || t.checkpoints[c].cost != acc.cost) {
                throw std::invalid_argument("average: traces have different cost axes");
            }
            const auto& p = t.checkpoints[c];
            acc.s += p.s;
            acc.objective += p.objective;
            acc.train_error += p.train_error;
            acc.test_error += p.test_error;
            acc.margins.mean += p.margins.mean;
            acc.margins.variance += p.margins.variance;
            acc.margins.median += p.margins.median;
            acc.margins.q25 += p.margins.q25;
            acc.margins.q75 += p.margins.q75;
            acc.margins.min += p.margins.min;
            acc.margins.max += p.margins.max;
            acc.margins.catoni_location += p.margins.catoni_location;
        }
        acc.s /= k;
        acc.objective /= k;
        acc.train_error /= k;
        acc.test_error /= k;
        acc.margins.mean /= k;
        acc.margins.variance /= k;
        acc.margins.median /= k;
        acc.margins.q25 /= k;
        acc.margins.q75 /= k;
        acc.margins.min /= k;
        acc.margins.max /= k;
        acc.margins.catoni_location /= k;
        mean.checkpoints[c] = acc;
    }
    return mean;
}

std::vector<BestLambda> select_best_lambda(const std::vector<RunSummary>& runs) {
    std::vector<BestLambda> best;
    for (const auto& run : runs) {
        BestLambda here{run.algorithm, run.lambda, std::numeric_limits<double>::infinity(), 0};
        for (const auto& c : run.mean.checkpoints) {
            if (c.test_error < here.best_test_error) {
                here.best_test_error = c.test_error;
                here.best_cost = c.cost;
            }
        }
        auto it = std::find_if(best.begin(), best.end(), [&](const BestLambda& b) { return b.algorithm == run.algorithm; });
        if (it == best.end()) {
            best.push_back(here);
        } else if (here.best_test_error < it->best_test_error) {
            *it = here;
        }
    }
    return best;
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
    const auto old = out.precision(17);
    out << kTraceHeader << '\n';
    for (const auto& c : trace.checkpoints) {
        const auto& m = c.margins;
        out << c.cost << ',' << c.s << ',' << c.objective << ',' << c.train_error << ',' << c.test_error << ','
            << m.mean << ',' << m.variance << ',' << m.median << ',' << m.q25 << ',' << m.q75 << ',' << m.min << ','
            << m.max << ',' << m.catoni_location << '\n';
    }
    out.precision(old);
}

void write_best_csv(std::ostream& out, const std::vector<BestLambda>& best) {
    const auto old = out.precision(17);
    out << "algorithm,lambda,best_test_err,best_cost\n";
    for (const auto& b : best) {
        out << algorithm_name(b.algorithm) << ',' << b.lambda << ',' << b.best_test_error << ',' << b.best_cost << '\n';
    }
    out.precision(old);
}

std::string format_lambda(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", lambda);
    return buf;
}

namespace {

struct Job {
    std::size_t run;
    std::size_t trial;
};

void write_file(const std::filesystem::path& path, const auto& writer, std::vector<std::string>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    writer(out);
    files.push_back(path.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("experiment: trials must be at least 1");
    if (cfg.algorithms.empty() || cfg.lambdas.empty()) throw std::invalid_argument("experiment: nothing to run");

    Dataset full;
    if (cfg.dataset) {
        full = *cfg.dataset;
    } else if (cfg.loader) {
        try {
            full = load_dataset(*cfg.loader);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("experiment: cannot load dataset: ") + e.what());
        }
    } else {
        throw std::invalid_argument("experiment: no dataset configured");
    }
    if (cfg.split.n_train == 0) throw std::invalid_argument("experiment: n_train must be set");

    std::vector<RunSummary> runs;
    for (Algorithm a : cfg.algorithms) {
        for (double lam : cfg.lambdas) {
            runs.push_back({a, lam, std::vector<TrainTrace>(cfg.trials), {}});
        }
    }
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({r, t});
    }

    auto run_job = [&](const Job& job) {
        RunSummary& run = runs[job.run];
        const std::uint64_t seed = trial_seed(cfg.seed, job.trial);
        SplitSpec split = cfg.split;
        split.seed = seed;
        const Split data = balanced_subsample(full, split);

        TrainConfig tc;
        tc.loss = ScaledLoss(cfg.initial_scale, cfg.gamma);
        tc.k_bias = cfg.k_bias;
        tc.lambda = run.lambda;
        tc.seed = seed;
        tc.delta = cfg.delta;
        tc.algorithm = run.algorithm;
        tc.step = cfg.step;
        const std::size_t n = data.train.size();
        if (run.algorithm == Algorithm::margin_pursuit && cfg.mode == Mode::batch) {
            tc.mode = Mode::batch;
            tc.iterations = cfg.epochs;
        } else {
            tc.mode = Mode::stochastic;
            tc.iterations = cfg.epochs * n;
            tc.checkpoint_every = n;
            if (run.algorithm == Algorithm::margin_pursuit && cfg.rescale_at_epoch) {
                tc.rescale_at = *cfg.rescale_at_epoch * n;
            }
        }
        run.trials[job.trial] = train(data.train, tc, &data.test).trace;
    };

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;
    std::size_t failed_trial = 0;
    bool failed = false;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                run_job(jobs[j]);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                if (!failed || j < failed_trial) {
                    failed = true;
                    failed_trial = j;
                    first_error = e.what();
                }
                next = jobs.size();
            }
        }
    };
    const std::size_t nworkers = std::max<std::size_t>(1, std::min(cfg.workers, jobs.size()));
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed) {
        const Job& j = jobs[failed_trial];
        throw std::runtime_error("experiment: " + std::string(algorithm_name(runs[j.run].algorithm)) + " lambda=" +
                                 format_lambda(runs[j.run].lambda) + " trial " + std::to_string(j.trial) +
                                 " failed: " + first_error);
    }

    ExperimentResult result;
    for (auto& run : runs) run.mean = average_traces(run.trials);
    result.best = select_best_lambda(runs);

    namespace fs = std::filesystem;
    const fs::path root(cfg.output_dir);
    fs::create_directories(root / "runs");
    for (const auto& run : runs) {
        const std::string stem = std::string(algorithm_name(run.algorithm)) + "_lam" + format_lambda(run.lambda);
        for (std::size_t t = 0; t < run.trials.size(); ++t) {
            write_file(root / "runs" / (stem + "_trial" + std::to_string(t) + ".csv"),
                       [&](std::ostream& o) { write_trace_csv(o, run.trials[t]); }, result.files);
        }
        write_file(root / (stem + "_mean.csv"), [&](std::ostream& o) { write_trace_csv(o, run.mean); }, result.files);
    }
    write_file(root / "best_lambda.csv", [&](std::ostream& o) { write_best_csv(o, result.best); }, result.files);
    result.runs = std::move(runs);
    return result;
}

}  // namespace marginpursuit

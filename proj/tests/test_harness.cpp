#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "marginpursuit/estimator.hpp"
#include "marginpursuit/harness.hpp"
#include "marginpursuit/metrics.hpp"
#include "oracles.hpp"

using namespace marginpursuit;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    Csv c;
    std::string line;
    std::getline(in, line);
    c.header = split_commas(line);
    while (std::getline(in, line)) c.rows.push_back(split_commas(line));
    return c;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("mp_harness_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig toy_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.dataset = two_gaussian_fixture(60, 3, 2.0, 0.3, 11);
    cfg.split.n_train = 20;
    cfg.split.size_cap_ratio = 10.0;
    cfg.lambdas = {1e-1, 1e-2};
    cfg.epochs = 4;
    cfg.trials = 3;
    cfg.seed = 5;
    cfg.output_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("margin stats hand cases") {
    const std::vector<double> m{3.0, 1.0, 2.0};
    const auto st = margin_stats(m, 1.0);
    CHECK(st.mean == 2.0);
    CHECK(st.median == 2.0);
    CHECK(st.variance == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(st.min == 1.0);
    CHECK(st.max == 3.0);
    CHECK(st.catoni_location == Approx(2.0).epsilon(1e-9));

    const std::vector<double> flat(7, -0.25);
    const auto f = margin_stats(flat, 2.0);
    CHECK(f.variance == 0.0);
    for (double v : {f.mean, f.median, f.q25, f.q75, f.min, f.max, f.catoni_location}) CHECK(v == -0.25);
    CHECK_THROWS_AS(margin_stats(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("margin stats match a sort-based oracle") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.5, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> m(1 + rng() % 80);
        for (double& v : m) v = g(rng);
        const auto st = margin_stats(m, 1.3);
        long double mean = 0.0L;
        for (double v : m) mean += v;
        mean /= m.size();
        long double var = 0.0L;
        for (double v : m) var += (v - mean) * (v - mean);
        var /= m.size();
        CHECK(st.mean == Approx(static_cast<double>(mean)).epsilon(1e-12).scale(1.0));
        CHECK(st.variance == Approx(static_cast<double>(var)).epsilon(1e-12));
        CHECK(st.median == oracle::nearest_rank(m, 0.5));
        CHECK(st.q25 == oracle::nearest_rank(m, 0.25));
        CHECK(st.q75 == oracle::nearest_rank(m, 0.75));
        CHECK(st.min == *std::min_element(m.begin(), m.end()));
        CHECK(st.max == *std::max_element(m.begin(), m.end()));
        CHECK(st.min <= st.q25);
        CHECK(st.q25 <= st.median);
        CHECK(st.median <= st.q75);
        CHECK(st.q75 <= st.max);
        CHECK(st.catoni_location == catoni_estimate(MarginSample(m), 1.3).value);
    }
}

TEST_CASE("misclassification error") {
    const Dataset d({1.0, 0.0, -1.0, 0.0, 0.0, 1.0}, {1.0, -1.0, 1.0}, 2);
    CHECK(misclassification_error(LinearModel(std::vector<double>{1.0, 1.0}), d) == 0.0);
    CHECK(misclassification_error(LinearModel(2), d) == 1.0);
    CHECK(misclassification_error(LinearModel(std::vector<double>{-1.0, -1.0}), d) == 1.0);
    // One zero score, counted as an error.
    CHECK(misclassification_error(LinearModel(std::vector<double>{1.0, 0.0}), d) == Approx(1.0 / 3.0));
    CHECK_THROWS_AS(misclassification_error(LinearModel(2), Dataset()), std::invalid_argument);
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "path = /tmp/x.csv\nn_train = 40\nalgorithms = pegasos, margin_pursuit\nlambdas = 1e-2,1e-4\n"
        "epochs = 7\nrescale_at_epoch = 2\ntrials = 4\nworkers = 3\nmode = batch\ngamma = 0.5\n");
    const auto cfg = ExperimentConfig::from(KeyValueConfig::parse(in));
    REQUIRE(cfg.loader);
    CHECK(cfg.loader->path == "/tmp/x.csv");
    CHECK(cfg.split.n_train == 40);
    CHECK(cfg.algorithms == std::vector<Algorithm>{Algorithm::pegasos, Algorithm::margin_pursuit});
    CHECK(cfg.lambdas == std::vector<double>{1e-2, 1e-4});
    CHECK(cfg.epochs == 7);
    CHECK(cfg.rescale_at_epoch == std::optional<std::size_t>(2));
    CHECK(cfg.trials == 4);
    CHECK(cfg.workers == 3);
    CHECK(cfg.mode == Mode::batch);
    CHECK(cfg.gamma == 0.5);

    const auto defaults = ExperimentConfig::from(KeyValueConfig{});
    CHECK(defaults.trials == 25);
    CHECK(defaults.gamma == 1.0);
    CHECK(defaults.lambdas == std::vector<double>{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});

    std::istringstream zero("trials = 0\n");
    CHECK_THROWS_AS(ExperimentConfig::from(KeyValueConfig::parse(zero)), std::invalid_argument);
    std::istringstream bad_alg("algorithms = svm\n");
    CHECK_THROWS_AS(ExperimentConfig::from(KeyValueConfig::parse(bad_alg)), std::invalid_argument);
}

TEST_CASE("zero step, one pass: trace is the initial model's metrics") {
    ExperimentConfig cfg = toy_config(scratch("zero").string());
    cfg.trials = 1;
    cfg.epochs = 1;
    cfg.step = 0.0;
    cfg.mode = Mode::batch;
    cfg.algorithms = {Algorithm::margin_pursuit};
    cfg.lambdas = {1e-2};
    const auto r = run_experiment(cfg);
    const auto& c = r.runs[0].trials[0].checkpoints;
    REQUIRE(c.size() == 2);
    CHECK(c[1].objective == c[0].objective);
    CHECK(c[1].test_error == c[0].test_error);
    CHECK(c[1].margins.median == c[0].margins.median);
}

TEST_CASE("experiment outputs") {
    const auto out = scratch("outputs");
    ExperimentConfig cfg = toy_config(out.string());
    const auto r = run_experiment(cfg);
    REQUIRE(r.runs.size() == 4);

    // Shared cost axis across algorithms and lambdas.
    for (const auto& run : r.runs) {
        REQUIRE(run.mean.checkpoints.size() == r.runs[0].mean.checkpoints.size());
        for (std::size_t i = 0; i < run.mean.checkpoints.size(); ++i) {
            CHECK(run.mean.checkpoints[i].cost == r.runs[0].mean.checkpoints[i].cost);
        }
    }

    // Every file has the fixed schema and the aggregate is the exact mean of
    // the per-trial files.
    for (const auto& run : r.runs) {
        const std::string stem = std::string(algorithm_name(run.algorithm)) + "_lam" + format_lambda(run.lambda);
        const auto mean = read_csv(out / (stem + "_mean.csv"));
        CHECK(mean.header == split_commas(std::string(kTraceHeader)));
        std::vector<Csv> trials;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            trials.push_back(read_csv(out / "runs" / (stem + "_trial" + std::to_string(t) + ".csv")));
            CHECK(trials.back().header == mean.header);
            REQUIRE(trials.back().rows.size() == mean.rows.size());
        }
        for (std::size_t i = 0; i < mean.rows.size(); ++i) {
            for (std::size_t col = 0; col < mean.header.size(); ++col) {
                double acc = 0.0;
                for (const auto& t : trials) acc += std::stod(t.rows[i][col]);
                CHECK(std::stod(mean.rows[i][col]) == Approx(acc / cfg.trials).epsilon(1e-15).scale(1e-300));
            }
        }
    }

    // Best lambda re-derived from the mean files alone.
    const auto best = read_csv(out / "best_lambda.csv");
    CHECK(best.header == std::vector<std::string>{"algorithm", "lambda", "best_test_err", "best_cost"});
    REQUIRE(best.rows.size() == 2);
    for (const auto& row : best.rows) {
        double lowest = INFINITY, lowest_lambda = 0.0;
        std::size_t lowest_cost = 0;
        for (double lam : cfg.lambdas) {
            const auto mean = read_csv(out / (row[0] + "_lam" + format_lambda(lam) + "_mean.csv"));
            for (const auto& m : mean.rows) {
                const double e = std::stod(m[4]);
                if (e < lowest) {
                    lowest = e;
                    lowest_lambda = lam;
                    lowest_cost = std::stoul(m[0]);
                }
            }
        }
        CHECK(std::stod(row[1]) == lowest_lambda);
        CHECK(std::stod(row[2]) == lowest);
        CHECK(std::stoul(row[3]) == lowest_cost);
    }
}

TEST_CASE("runs are byte-reproducible and independent of the worker count") {
    const auto a = scratch("repro_a"), b = scratch("repro_b");
    ExperimentConfig ca = toy_config(a.string());
    ExperimentConfig cb = toy_config(b.string());
    cb.workers = 4;
    const auto ra = run_experiment(ca);
    const auto rb = run_experiment(cb);
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
    }
}

TEST_CASE("golden trace") {
    // Regenerate with MARGINPURSUIT_UPDATE_GOLDEN=1 after an intended change.
    const fs::path golden = fs::path(MARGINPURSUIT_TEST_DATA) / "golden_toy_mean.csv";
    const auto out = scratch("golden");
    ExperimentConfig cfg = toy_config(out.string());
    cfg.algorithms = {Algorithm::margin_pursuit};
    cfg.lambdas = {1e-2};
    run_experiment(cfg);
    const fs::path produced = out / ("margin_pursuit_lam" + format_lambda(1e-2) + "_mean.csv");
    if (std::getenv("MARGINPURSUIT_UPDATE_GOLDEN") != nullptr) fs::copy_file(produced, golden, fs::copy_options::overwrite_existing);
    REQUIRE(fs::exists(golden));
    const auto want = read_csv(golden), got = read_csv(produced);
    CHECK(got.header == want.header);
    REQUIRE(got.rows.size() == want.rows.size());
    for (std::size_t i = 0; i < want.rows.size(); ++i) {
        REQUIRE(got.rows[i].size() == want.header.size());
        CHECK(got.rows[i][0] == want.rows[i][0]);
        for (std::size_t col = 1; col < want.header.size(); ++col) {
            // Vector and scalar kernels may differ in the last bits.
            CHECK(std::stod(got.rows[i][col]) == Approx(std::stod(want.rows[i][col])).epsilon(1e-9).scale(1e-12));
        }
    }
}

TEST_CASE("separable fixture: mean test error of margin pursuit reaches zero") {
    ExperimentConfig cfg;
    cfg.dataset = two_gaussian_fixture(200, 5, 3.0, 1.0, 42);
    cfg.split.n_train = 50;
    cfg.algorithms = {Algorithm::margin_pursuit};
    cfg.lambdas = {1e-3};
    cfg.epochs = 50;
    cfg.trials = 25;
    cfg.seed = 7;
    cfg.workers = 4;
    cfg.output_dir = scratch("separable").string();
    const auto r = run_experiment(cfg);
    CHECK(r.runs[0].mean.checkpoints.back().test_error == 0.0);
}

TEST_CASE("failures abort and name the trial") {
    ExperimentConfig cfg = toy_config(scratch("fail").string());
    cfg.split.n_train = 1000;
    cfg.split.size_cap_ratio = 0.0;
    try {
        run_experiment(cfg);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("trial 0") != std::string::npos);
    }
    ExperimentConfig missing;
    missing.split.n_train = 10;
    KeyValueConfig kv;
    kv.set("path", "/nonexistent/data.csv");
    missing.loader = LoaderConfig::from(kv);
    CHECK_THROWS_AS(run_experiment(missing), std::runtime_error);
}

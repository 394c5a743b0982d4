#pragma once
// Binary classification samples: ingestion, binarization, balanced splits.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace marginpursuit {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// n x d features (dense, row-major) with labels in {-1, +1}.
class Dataset {
public:
    Dataset() = default;
    // Throws std::invalid_argument on shape mismatch, labels outside {-1,+1}
    // or non-finite features.
    Dataset(std::vector<double> features, std::vector<double> labels, std::size_t dim);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return labels_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * dim_, dim_};
    }
    double label(std::size_t i) const { return labels_[i]; }

    std::span<const double> features() const noexcept { return features_; }
    std::span<const double> labels() const noexcept { return labels_; }

    std::size_t count_positive() const;

    // Rows picked by index, in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<double> features_;
    std::vector<double> labels_;
    std::size_t dim_ = 0;
};

// Maps a raw label to the positive class.
using PositiveClass = std::function<bool(double)>;

PositiveClass positive_if_equal(double value);
PositiveClass positive_if_greater(double threshold);

// `<label> <idx>:<val> ...` with 1-based ascending indices. Missing entries
// are zero and d is the largest index seen (or min_dim if larger).
Dataset parse_libsvm(std::istream& in, const PositiveClass& positive, std::size_t min_dim = 0);
Dataset parse_libsvm(std::string_view text, const PositiveClass& positive, std::size_t min_dim = 0);

// `label,f1,...,fd` per row; a first row that does not parse as numbers is
// taken as a header.
Dataset parse_csv(std::istream& in, const PositiveClass& positive);
Dataset parse_csv(std::string_view text, const PositiveClass& positive);

// Labels are written as +1/-1; zeros are omitted; values use 17 significant
// digits so parse_libsvm(serialize) reproduces the dataset exactly.
void write_libsvm(std::ostream& out, const Dataset& data);
void write_csv(std::ostream& out, const Dataset& data);

// Per-feature min-max rescaling to [0, 1], fitted on one dataset and applied
// to any other with the same dimension. Constant features map to 0.
class MinMaxScaler {
public:
    static MinMaxScaler fit(const Dataset& data);
    Dataset apply(const Dataset& data) const;

private:
    std::vector<double> lo_;
    std::vector<double> span_;
};

struct SplitSpec {
    std::size_t n_train = 0;
    double balance = 0.5;          // target positive fraction, in (0, 1)
    std::uint64_t seed = 0;
    double size_cap_ratio = 10.0;  // n_train <= ratio * d; <= 0 disables
};

struct Split {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_index;  // rows of the source dataset
    std::vector<std::size_t> test_index;
};

// Train: n_train rows drawn without replacement with round(balance*n_train)
// positives. Test: the largest exactly balanced (50/50) subset of the rest.
// Throws std::invalid_argument naming the deficient class.
Split balanced_subsample(const Dataset& full, const SplitSpec& spec);

// Two Gaussian classes, x ~ N(y * separation * e_1, I_d), balanced labels.
// Points with y * x_1 < gap are redrawn, so every sample is linearly
// separable by e_1 with margin at least gap (gap <= 0 disables the rejection).
Dataset two_gaussian_fixture(std::size_t n, std::size_t d, double separation, double gap, std::uint64_t seed);

// Reads `key = value` lines; `#` starts a comment. Keys are case-sensitive.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number_or(const std::string& key, double fallback) const;
    void set(const std::string& key, std::string value);

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Dataset location plus binarization rule.
//   path = data/digits.libsvm
//   format = libsvm | csv              (default: from extension)
//   positive_label = 5                 (label == 5 -> +1, others -1)
//   positive_above = 0                 (label > 0 -> +1), used if no positive_label
//   minmax = true                      (optional feature rescaling, default off)
struct LoaderConfig {
    std::string path;
    std::string format;
    PositiveClass positive;
    bool minmax = false;

    static LoaderConfig from(const KeyValueConfig& kv);
};

Dataset load_dataset(const LoaderConfig& cfg);

}  // namespace marginpursuit

#include "marginpursuit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace marginpursuit {

Dataset::Dataset(std::vector<double> features, std::vector<double> labels, std::size_t dim)
    : features_(std::move(features)), labels_(std::move(labels)), dim_(dim) {
    if (features_.size() != labels_.size() * dim_) {
        throw std::invalid_argument("dataset: feature count does not match n * d");
    }
    for (double y : labels_) {
        if (y != 1.0 && y != -1.0) throw std::invalid_argument("dataset: labels must be -1 or +1");
    }
    for (double x : features_) {
        if (!std::isfinite(x)) throw std::invalid_argument("dataset: non-finite feature value");
    }
}

std::size_t Dataset::count_positive() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1.0));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<double> feats;
    std::vector<double> labs;
    feats.reserve(indices.size() * dim_);
    labs.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw std::out_of_range("dataset: subset index out of range");
        const auto r = row(i);
        feats.insert(feats.end(), r.begin(), r.end());
        labs.push_back(labels_[i]);
    }
    Dataset out;
    out.features_ = std::move(feats);
    out.labels_ = std::move(labs);
    out.dim_ = dim_;
    return out;
}

PositiveClass positive_if_equal(double value) {
    return [value](double label) { return label == value; };
}

PositiveClass positive_if_greater(double threshold) {
    return [threshold](double label) { return label > threshold; };
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view tok) {
    tok = trim(tok);
    if (tok.empty()) return std::nullopt;
    if (tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

std::optional<std::size_t> to_index(std::string_view tok) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double binarize(double raw, const PositiveClass& positive) { return positive(raw) ? 1.0 : -1.0; }

struct SparseRow {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;
};

}  // namespace

Dataset parse_libsvm(std::istream& in, const PositiveClass& positive, std::size_t min_dim) {
    std::vector<SparseRow> rows;
    std::size_t dim = min_dim;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto toks = split_ws(body);
        const auto label = to_double(toks[0]);
        if (!label) throw ParseError(lineno, "bad label '" + std::string(toks[0]) + "'");
        SparseRow row{binarize(*label, positive), {}};
        std::size_t prev = 0;
        for (std::size_t t = 1; t < toks.size(); ++t) {
            const auto colon = toks[t].find(':');
            if (colon == std::string_view::npos) {
                throw ParseError(lineno, "expected idx:val, got '" + std::string(toks[t]) + "'");
            }
            const auto idx = to_index(toks[t].substr(0, colon));
            if (!idx || *idx == 0) {
                throw ParseError(lineno, "bad feature index '" + std::string(toks[t].substr(0, colon)) + "'");
            }
            if (*idx <= prev) throw ParseError(lineno, "feature indices must be ascending");
            const auto val = to_double(toks[t].substr(colon + 1));
            if (!val || !std::isfinite(*val)) {
                throw ParseError(lineno, "bad feature value '" + std::string(toks[t].substr(colon + 1)) + "'");
            }
            prev = *idx;
            dim = std::max(dim, *idx);
            row.entries.emplace_back(*idx - 1, *val);
        }
        rows.push_back(std::move(row));
    }
    std::vector<double> feats(rows.size() * dim, 0.0);
    std::vector<double> labels;
    labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& [j, v] : rows[i].entries) feats[i * dim + j] = v;
        labels.push_back(rows[i].label);
    }
    return Dataset(std::move(feats), std::move(labels), rows.empty() ? 0 : dim);
}

Dataset parse_libsvm(std::string_view text, const PositiveClass& positive, std::size_t min_dim) {
    std::istringstream in{std::string(text)};
    return parse_libsvm(in, positive, min_dim);
}

Dataset parse_csv(std::istream& in, const PositiveClass& positive) {
    std::vector<double> feats;
    std::vector<double> labels;
    std::size_t dim = 0;
    bool have_dim = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        std::vector<double> vals;
        bool numeric = true;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            const auto tok = body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            const auto v = to_double(tok);
            if (!v) {
                numeric = false;
                break;
            }
            vals.push_back(*v);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!numeric) {
            if (!have_dim && labels.empty()) {
                // header row
                have_dim = true;
                dim = static_cast<std::size_t>(std::count(body.begin(), body.end(), ','));
                continue;
            }
            throw ParseError(lineno, "non-numeric field");
        }
        if (!have_dim) {
            have_dim = true;
            dim = vals.size() - 1;
        }
        if (vals.size() != dim + 1) {
            throw ParseError(lineno, "expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(vals.size()));
        }
        for (std::size_t j = 1; j < vals.size(); ++j) {
            if (!std::isfinite(vals[j])) throw ParseError(lineno, "non-finite feature value");
        }
        labels.push_back(binarize(vals[0], positive));
        feats.insert(feats.end(), vals.begin() + 1, vals.end());
    }
    return Dataset(std::move(feats), std::move(labels), labels.empty() ? 0 : dim);
}

Dataset parse_csv(std::string_view text, const PositiveClass& positive) {
    std::istringstream in{std::string(text)};
    return parse_csv(in, positive);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << (data.label(i) > 0 ? "+1" : "-1");
        const auto r = data.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (r[j] != 0.0) out << ' ' << (j + 1) << ':' << r[j];
        }
        out << '\n';
    }
    out.precision(old);
}

void write_csv(std::ostream& out, const Dataset& data) {
    const auto old = out.precision(17);
    out << "label";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << (data.label(i) > 0 ? 1 : -1);
        for (double v : data.row(i)) out << ',' << v;
        out << '\n';
    }
    out.precision(old);
}

MinMaxScaler MinMaxScaler::fit(const Dataset& data) {
    MinMaxScaler s;
    const std::size_t d = data.dim();
    s.lo_.assign(d, 0.0);
    s.span_.assign(d, 0.0);
    if (data.empty()) return s;
    std::vector<double> hi(d);
    for (std::size_t j = 0; j < d; ++j) s.lo_[j] = hi[j] = data.row(0)[j];
    for (std::size_t i = 1; i < data.size(); ++i) {
        const auto r = data.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            s.lo_[j] = std::min(s.lo_[j], r[j]);
            hi[j] = std::max(hi[j], r[j]);
        }
    }
    for (std::size_t j = 0; j < d; ++j) s.span_[j] = hi[j] - s.lo_[j];
    return s;
}

Dataset MinMaxScaler::apply(const Dataset& data) const {
    if (data.dim() != lo_.size()) throw std::invalid_argument("minmax: dimension mismatch");
    std::vector<double> feats(data.features().begin(), data.features().end());
    const std::size_t d = data.dim();
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double& v = feats[i * d + j];
            v = span_[j] > 0.0 ? (v - lo_[j]) / span_[j] : 0.0;
        }
    }
    return Dataset(std::move(feats), std::vector<double>(data.labels().begin(), data.labels().end()), d);
}

Split balanced_subsample(const Dataset& full, const SplitSpec& spec) {
    if (!(spec.balance > 0.0 && spec.balance < 1.0)) {
        throw std::invalid_argument("split: balance must lie in (0, 1)");
    }
    if (spec.n_train == 0) throw std::invalid_argument("split: n_train must be positive");
    if (spec.size_cap_ratio > 0.0 &&
        static_cast<double>(spec.n_train) > spec.size_cap_ratio * static_cast<double>(full.dim())) {
        throw std::invalid_argument("split: n_train exceeds " + std::to_string(spec.size_cap_ratio) +
                                    " times the dimension");
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < full.size(); ++i) (full.label(i) > 0 ? pos : neg).push_back(i);

    const auto want_pos = static_cast<std::size_t>(std::llround(spec.balance * static_cast<double>(spec.n_train)));
    const std::size_t want_neg = spec.n_train - want_pos;
    if (pos.size() < want_pos) {
        throw std::invalid_argument("split: positive class has " + std::to_string(pos.size()) + " rows, need " +
                                    std::to_string(want_pos));
    }
    if (neg.size() < want_neg) {
        throw std::invalid_argument("split: negative class has " + std::to_string(neg.size()) + " rows, need " +
                                    std::to_string(want_neg));
    }

    std::mt19937_64 rng(spec.seed);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);

    Split out;
    out.train_index.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(want_pos));
    out.train_index.insert(out.train_index.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(want_neg));
    std::shuffle(out.train_index.begin(), out.train_index.end(), rng);

    const std::size_t per_class = std::min(pos.size() - want_pos, neg.size() - want_neg);
    out.test_index.assign(pos.begin() + static_cast<std::ptrdiff_t>(want_pos),
                          pos.begin() + static_cast<std::ptrdiff_t>(want_pos + per_class));
    out.test_index.insert(out.test_index.end(), neg.begin() + static_cast<std::ptrdiff_t>(want_neg),
                          neg.begin() + static_cast<std::ptrdiff_t>(want_neg + per_class));
    std::shuffle(out.test_index.begin(), out.test_index.end(), rng);

    out.train = full.subset(out.train_index);
    out.test = full.subset(out.test_index);
    return out;
}

Dataset two_gaussian_fixture(std::size_t n, std::size_t d, double separation, double gap, std::uint64_t seed) {
    if (d == 0) throw std::invalid_argument("fixture: dimension must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> feats;
    std::vector<double> labels;
    feats.reserve(n * d);
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = i % 2 == 0 ? 1.0 : -1.0;
        double first = 0.0;
        do {
            first = y * separation + noise(rng);
        } while (gap > 0.0 && y * first < gap);
        labels.push_back(y);
        feats.push_back(first);
        for (std::size_t j = 1; j < d; ++j) feats.push_back(noise(rng));
    }
    return Dataset(std::move(feats), std::move(labels), d);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
        const auto key = trim(body.substr(0, eq));
        if (key.empty()) throw ParseError(lineno, "empty key");
        cfg.set(std::string(key), std::string(trim(body.substr(eq + 1))));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in);
}

bool KeyValueConfig::has(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const auto num = to_double(*v);
    if (!num) throw std::invalid_argument("config: key '" + key + "' is not a number: " + *v);
    return *num;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(key, std::move(value));
}

LoaderConfig LoaderConfig::from(const KeyValueConfig& kv) {
    LoaderConfig cfg;
    cfg.path = kv.get_or("path", "");
    if (cfg.path.empty()) throw std::invalid_argument("loader: missing 'path'");
    cfg.format = kv.get_or("format", "");
    if (cfg.format.empty()) {
        const bool csv = cfg.path.size() >= 4 && cfg.path.substr(cfg.path.size() - 4) == ".csv";
        cfg.format = csv ? "csv" : "libsvm";
    }
    if (cfg.format != "csv" && cfg.format != "libsvm") {
        throw std::invalid_argument("loader: unknown format '" + cfg.format + "'");
    }
    if (kv.has("positive_label")) {
        cfg.positive = positive_if_equal(kv.number_or("positive_label", 1.0));
    } else {
        cfg.positive = positive_if_greater(kv.number_or("positive_above", 0.0));
    }
    const auto mm = kv.get_or("minmax", "false");
    cfg.minmax = mm == "true" || mm == "1" || mm == "yes";
    return cfg;
}

Dataset load_dataset(const LoaderConfig& cfg) {
    std::ifstream in(cfg.path);
    if (!in) throw std::runtime_error("cannot open dataset: " + cfg.path);
    Dataset data = cfg.format == "csv" ? parse_csv(in, cfg.positive) : parse_libsvm(in, cfg.positive);
    if (data.empty()) throw std::runtime_error("dataset is empty: " + cfg.path);
    if (cfg.minmax) data = MinMaxScaler::fit(data).apply(data);
    return data;
}

}  // namespace marginpursuit

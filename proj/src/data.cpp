#include "qpulsar/data.hpp"

#include "qpulsar/errors.hpp"
#include "random_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qpulsar {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

Sample parse_row(std::string_view line, std::size_t line_no, std::size_t row) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find(',', start);
        cells.push_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    if (cells.size() != kHtru2Features + 1) {
        throw ParseError(line_no, "expected " + std::to_string(kHtru2Features + 1) + " fields, found " +
                                      std::to_string(cells.size()));
    }
    Sample sample;
    sample.source_row = row;
    sample.features.resize(kHtru2Features);
    for (std::size_t f = 0; f < kHtru2Features; ++f) {
        const auto cell = cells[f];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
            throw ParseError(line_no, "field " + std::to_string(f + 1) + " is not a number: '" + std::string(cell) + "'");
        }
        sample.features[f] = v;
    }
    const auto label = cells[kHtru2Features];
    if (label == "0") {
        sample.label = 0;
    } else if (label == "1") {
        sample.label = 1;
    } else {
        throw ParseError(line_no, "label must be 0 or 1, found '" + std::string(label) + "'");
    }
    return sample;
}

std::vector<std::size_t> indices_with_label(const Dataset &pool, int label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.samples.size(); ++i) {
        if (pool.samples[i].label == label) {
            idx.push_back(i);
        }
    }
    return idx;
}

Dataset subset(const Dataset &pool, std::span<const std::size_t> idx) {
    Dataset out;
    out.normalization = pool.normalization;
    out.samples.reserve(idx.size());
    for (const std::size_t i : idx) {
        out.samples.push_back(pool.samples[i]);
    }
    return out;
}

}  // namespace

FeatureVector Normalization::apply(std::span<const double> raw) const {
    if (raw.size() != min.size()) {
        throw std::invalid_argument("feature count does not match normalization");
    }
    FeatureVector out(raw.size());
    for (std::size_t f = 0; f < raw.size(); ++f) {
        const double range = max[f] - min[f];
        if (!(range > 0.0)) {
            out[f] = 0.0;
            continue;
        }
        out[f] = std::clamp(std::numbers::pi * (raw[f] - min[f]) / range, 0.0, std::numbers::pi);
    }
    return out;
}

FeatureVector Normalization::invert(std::span<const double> angles) const {
    if (angles.size() != min.size()) {
        throw std::invalid_argument("feature count does not match normalization");
    }
    FeatureVector out(angles.size());
    for (std::size_t f = 0; f < angles.size(); ++f) {
        out[f] = min[f] + angles[f] / std::numbers::pi * (max[f] - min[f]);
    }
    return out;
}

nlohmann::json Normalization::to_json() const { return {{"min", min}, {"max", max}}; }

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [label](const Sample &s) { return s.label == label; }));
}

std::vector<FeatureVector> Dataset::features() const {
    std::vector<FeatureVector> out;
    out.reserve(samples.size());
    for (const auto &s : samples) {
        out.push_back(s.features);
    }
    return out;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto &s : samples) {
        out.push_back(s.label);
    }
    return out;
}

Dataset load_htru2(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    Dataset dataset;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty()) {
            continue;
        }
        dataset.samples.push_back(parse_row(content, line_no, dataset.samples.size()));
    }
    if (dataset.empty()) {
        throw InsufficientData(path.string() + " contains no samples");
    }
    return dataset;
}

void write_htru2(const Dataset &dataset, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << std::setprecision(17);
    for (const auto &s : dataset.samples) {
        for (const double v : s.features) {
            out << v << ',';
        }
        out << s.label << '\n';
    }
}

Dataset normalize_to_angle(const Dataset &dataset) {
    if (dataset.empty()) {
        throw std::invalid_argument("cannot normalize an empty dataset");
    }
    const std::size_t nf = dataset.samples.front().features.size();
    Normalization norm{std::vector<double>(nf, std::numeric_limits<double>::infinity()),
                       std::vector<double>(nf, -std::numeric_limits<double>::infinity())};
    for (const auto &s : dataset.samples) {
        if (s.features.size() != nf) {
            throw std::invalid_argument("ragged feature vectors");
        }
        for (std::size_t f = 0; f < nf; ++f) {
            norm.min[f] = std::min(norm.min[f], s.features[f]);
            norm.max[f] = std::max(norm.max[f], s.features[f]);
        }
    }
    Dataset out;
    out.samples.reserve(dataset.size());
    for (const auto &s : dataset.samples) {
        out.samples.push_back({norm.apply(s.features), s.label, s.source_row});
    }
    out.normalization = std::move(norm);
    return out;
}

SplitPools split_70_30(const Dataset &dataset, std::uint64_t seed) {
    if (dataset.size() < 2) {
        throw InsufficientData("need at least 2 samples to split");
    }
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    detail::shuffle(std::span(order), rng);
    const std::size_t n_train = dataset.size() * 7 / 10;
    SplitPools pools;
    pools.seed = seed;
    pools.train_pool = subset(dataset, std::span(order).first(n_train));
    pools.test_pool = subset(dataset, std::span(order).subspan(n_train));
    return pools;
}

Dataset sample_balanced(const Dataset &pool, std::size_t n, std::uint64_t seed) {
    if (n == 0 || n % 2 != 0) {
        throw std::invalid_argument("balanced sample size must be even and positive, got " + std::to_string(n));
    }
    const std::size_t half = n / 2;
    auto pos = indices_with_label(pool, 1);
    auto neg = indices_with_label(pool, 0);
    if (pos.size() < half || neg.size() < half) {
        throw InsufficientData("pool has " + std::to_string(pos.size()) + " positives and " +
                               std::to_string(neg.size()) + " negatives; need " + std::to_string(half) + " of each");
    }
    std::mt19937_64 rng(seed);
    detail::partial_shuffle(std::span(pos), half, rng);
    detail::partial_shuffle(std::span(neg), half, rng);
    std::vector<std::size_t> chosen(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(half));
    chosen.insert(chosen.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(half));
    detail::shuffle(std::span(chosen), rng);
    return subset(pool, chosen);
}

Dataset sample_test(const Dataset &pool, std::size_t n, std::uint64_t seed, bool stratified) {
    if (n > pool.size()) {
        throw InsufficientData("requested " + std::to_string(n) + " test samples from a pool of " +
                               std::to_string(pool.size()));
    }
    std::mt19937_64 rng(seed);
    if (!stratified) {
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        detail::partial_shuffle(std::span(order), n, rng);
        return subset(pool, std::span(order).first(n));
    }
    auto pos = indices_with_label(pool, 1);
    auto neg = indices_with_label(pool, 0);
    const double share = pool.empty() ? 0.0 : static_cast<double>(pos.size()) / static_cast<double>(pool.size());
    auto n_pos = static_cast<std::size_t>(std::llround(share * static_cast<double>(n)));
    n_pos = std::min({n_pos, pos.size(), n});
    std::size_t n_neg = n - n_pos;
    if (n_neg > neg.size()) {
        n_neg = neg.size();
        n_pos = n - n_neg;
    }
    detail::partial_shuffle(std::span(pos), n_pos, rng);
    detail::partial_shuffle(std::span(neg), n_neg, rng);
    std::vector<std::size_t> chosen(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_pos));
    chosen.insert(chosen.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n_neg));
    detail::shuffle(std::span(chosen), rng);
    return subset(pool, chosen);
}

std::vector<Batch> make_batches(const Dataset &train_set, std::size_t batch_size, std::size_t n_epochs,
                                std::uint64_t seed) {
    if (batch_size == 0 || batch_size % 2 != 0) {
        throw std::invalid_argument("batch size must be even and positive");
    }
    auto pos = indices_with_label(train_set, 1);
    auto neg = indices_with_label(train_set, 0);
    if (pos.empty() || neg.empty()) {
        throw InsufficientData("balanced batches need both classes in the training set");
    }
    const std::size_t half = batch_size / 2;
    if (pos.size() < half || neg.size() < half) {
        throw InsufficientData("training set has fewer than " + std::to_string(half) + " samples of some class");
    }
    std::mt19937_64 rng(seed);
    std::vector<Batch> batches;
    batches.reserve(n_epochs);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        detail::partial_shuffle(std::span(pos), half, rng);
        detail::partial_shuffle(std::span(neg), half, rng);
        Batch batch(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(half));
        batch.insert(batch.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(half));
        batches.push_back(std::move(batch));
    }
    return batches;
}

DataSummary summarize(const Dataset &dataset) {
    DataSummary s;
    s.rows = dataset.size();
    s.positives = dataset.count(1);
    s.negatives = dataset.count(0);
    if (!dataset.empty()) {
        const std::size_t nf = dataset.samples.front().features.size();
        s.min.assign(nf, std::numeric_limits<double>::infinity());
        s.max.assign(nf, -std::numeric_limits<double>::infinity());
        for (const auto &sample : dataset.samples) {
            for (std::size_t f = 0; f < nf; ++f) {
                s.min[f] = std::min(s.min[f], sample.features[f]);
                s.max[f] = std::max(s.max[f], sample.features[f]);
            }
        }
    }
    return s;
}

nlohmann::json DataSummary::to_json() const {
    return {{"rows", rows}, {"positives", positives}, {"negatives", negatives}, {"feature_min", min},
            {"feature_max", max}};
}

}  // namespace qpulsar

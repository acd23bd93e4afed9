// HTRU-2 ingestion, angle normalization, pool splitting and seeded sampling.

#pragma once

#include "qpulsar/circuits.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace qpulsar {

inline constexpr std::size_t kHtru2Features = 8;

struct Sample {
    FeatureVector features;
    int label = 0;              // 1 = pulsar
    std::size_t source_row = 0; // 0-based row in the loaded file; identity across splits

    bool operator==(const Sample &) const = default;
};

/// Per-feature (min, max) used to map raw values onto [0, pi].
struct Normalization {
    std::vector<double> min;
    std::vector<double> max;

    /// pi * (v - min) / (max - min), clamped to [0, pi]; constant features map to 0.
    FeatureVector apply(std::span<const double> raw) const;
    /// Inverse map for values in [0, pi].
    FeatureVector invert(std::span<const double> angles) const;

    nlohmann::json to_json() const;
};

struct Dataset {
    std::vector<Sample> samples;
    std::optional<Normalization> normalization;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    std::size_t count(int label) const;

    std::vector<FeatureVector> features() const;
    std::vector<int> labels() const;
};

struct SplitPools {
    Dataset train_pool;
    Dataset test_pool;
    std::uint64_t seed = 0;
};

/// Rows of 8 numeric features and an integer 0/1 label, comma-separated, no header.
/// Blank lines are skipped. Throws ParseError (with line number) on malformed rows and
/// InsufficientData on an empty file.
Dataset load_htru2(const std::filesystem::path &path);

/// Writes the same 9-column shape load_htru2 reads.
void write_htru2(const Dataset &dataset, const std::filesystem::path &path);

/// Min/max taken over the whole dataset; stored on the result for later use on unseen data.
Dataset normalize_to_angle(const Dataset &dataset);

/// Seeded shuffle; the first floor(0.7 N) samples form the train pool.
SplitPools split_70_30(const Dataset &dataset, std::uint64_t seed);

/// n/2 samples of each class, uniformly without replacement within each class.
Dataset sample_balanced(const Dataset &pool, std::size_t n, std::uint64_t seed);

/// n samples uniformly without replacement. `stratified` keeps the pool's class ratio
/// (largest-remainder rounding) instead.
Dataset sample_test(const Dataset &pool, std::size_t n, std::uint64_t seed, bool stratified = false);

using Batch = std::vector<std::size_t>;  // indices into the training set

/// One balanced batch per epoch: batch_size/2 per class, distinct within a batch,
/// independent across batches (duplicates between batches are allowed).
std::vector<Batch> make_batches(const Dataset &train_set, std::size_t batch_size, std::size_t n_epochs,
                                std::uint64_t seed);

/// Summary of a loaded file (row count, class counts, per-feature raw ranges).
struct DataSummary {
    std::size_t rows = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::vector<double> min;
    std::vector<double> max;

    nlohmann::json to_json() const;
};

DataSummary summarize(const Dataset &dataset);

}  // namespace qpulsar

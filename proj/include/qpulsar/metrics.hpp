// Confusion matrices, the eight binary-classification metrics, and run aggregation.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qpulsar {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    bool operator==(const ConfusionMatrix &) const = default;
    nlohmann::json to_json() const;
};

/// Positive class is 1. Throws std::invalid_argument on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

inline constexpr std::size_t kMetricCount = 8;
inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "accuracy", "recall", "specificity", "precision", "npv", "balanced_accuracy", "g_mean", "informedness"};

/// Undefined (nullopt) wherever a denominator is zero; composites inherit it.
struct MetricsReport {
    std::optional<double> accuracy;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> precision;
    std::optional<double> npv;
    std::optional<double> balanced_accuracy;
    std::optional<double> g_mean;
    std::optional<double> informedness;

    /// In kMetricNames order.
    std::array<std::optional<double>, kMetricCount> values() const;
    nlohmann::json to_json() const;
};

MetricsReport metrics(const ConfusionMatrix &cm);

struct MetricSummary {
    double mean = 0.0;
    double standard_error = 0.0;  // sample stddev / sqrt(defined)
    double stddev = 0.0;          // sample stddev (n - 1)
    std::size_t defined = 0;      // runs contributing
    std::size_t undefined = 0;    // runs where the metric was undefined
};

struct RunAggregate {
    std::size_t runs = 0;
    std::array<MetricSummary, kMetricCount> metrics;

    const MetricSummary &operator[](std::string_view name) const;
    nlohmann::json to_json() const;
};

/// Mean, SE and stddev per metric over the defined entries; SE and stddev are 0 for
/// fewer than two defined entries.
RunAggregate aggregate_runs(std::span<const MetricsReport> reports);

/// Same statistics for a plain list of values.
MetricSummary summarize_values(std::span<const double> values);

}  // namespace qpulsar

#include "qpulsar/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpulsar {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json optional_json(const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json ConfusionMatrix::to_json() const { return {{"tp", tp}, {"tn", tn}, {"fp", fp}, {"fn", fn}}; }

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("prediction and label counts differ");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("confusion matrix of no samples");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = predictions[i] == 1;
        const bool actual = labels[i] == 1;
        if (predicted && actual) {
            ++cm.tp;
        } else if (!predicted && !actual) {
            ++cm.tn;
        } else if (predicted) {
            ++cm.fp;
        } else {
            ++cm.fn;
        }
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix &cm) {
    MetricsReport r;
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.recall = ratio(cm.tp, cm.tp + cm.fn);
    r.specificity = ratio(cm.tn, cm.tn + cm.fp);
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    r.npv = ratio(cm.tn, cm.tn + cm.fn);
    if (r.recall && r.specificity) {
        r.balanced_accuracy = 0.5 * (*r.recall + *r.specificity);
        r.g_mean = std::sqrt(*r.recall * *r.specificity);
        r.informedness = *r.recall + *r.specificity - 1.0;
    }
    return r;
}

std::array<std::optional<double>, kMetricCount> MetricsReport::values() const {
    return {accuracy, recall, specificity, precision, npv, balanced_accuracy, g_mean, informedness};
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    const auto v = values();
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        j[std::string(kMetricNames[k])] = optional_json(v[k]);
    }
    return j;
}

MetricSummary summarize_values(std::span<const double> values) {
    MetricSummary s;
    s.defined = values.size();
    if (values.empty()) {
        return s;
    }
    // Incremental mean: exact when all values coincide.
    std::size_t k = 0;
    for (const double v : values) {
        s.mean += (v - s.mean) / static_cast<double>(++k);
    }
    if (values.size() >= 2) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        s.standard_error = s.stddev / std::sqrt(static_cast<double>(values.size()));
    }
    return s;
}

RunAggregate aggregate_runs(std::span<const MetricsReport> reports) {
    if (reports.empty()) {
        throw std::invalid_argument("aggregate of zero runs");
    }
    RunAggregate agg;
    agg.runs = reports.size();
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        std::vector<double> defined;
        for (const auto &r : reports) {
            if (const auto v = r.values()[k]) {
                defined.push_back(*v);
            }
        }
        agg.metrics[k] = summarize_values(defined);
        agg.metrics[k].undefined = reports.size() - defined.size();
    }
    return agg;
}

const MetricSummary &RunAggregate::operator[](std::string_view name) const {
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        if (kMetricNames[k] == name) {
            return metrics[k];
        }
    }
    throw std::out_of_range("unknown metric " + std::string(name));
}

nlohmann::json RunAggregate::to_json() const {
    nlohmann::json j = {{"runs", runs}};
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        const auto &m = metrics[k];
        j["metrics"][std::string(kMetricNames[k])] = {{"mean", m.defined ? nlohmann::json(m.mean) : nlohmann::json(nullptr)},
                                                     {"standard_error", m.standard_error},
                                                     {"stddev", m.stddev},
                                                     {"defined", m.defined},
                                                     {"undefined", m.undefined}};
    }
    return j;
}

}  // namespace qpulsar

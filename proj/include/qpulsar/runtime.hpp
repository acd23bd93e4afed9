// Circuit-execution counting and device-time extrapolation.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

namespace qpulsar {

/// Measured per-execution device times used for extrapolation (seconds).
inline constexpr double kDeviceSecondsQsvm = 3.33;
inline constexpr double kDeviceSecondsQcnn = 142.00;
/// Epoch count assumed for extrapolated QCNN device training.
inline constexpr std::uint64_t kDeviceQcnnEpochs = 10;

struct QsvmTrain {
    std::uint64_t n_train;
};
struct QsvmPredict {
    std::uint64_t n_train;
    std::uint64_t n_test;
};
struct QcnnTrain {
    std::uint64_t epochs;
    std::uint64_t n_per_epoch;
};
struct QcnnPredict {
    std::uint64_t n_test;
};

using ExecutionKind = std::variant<QsvmTrain, QsvmPredict, QcnnTrain, QcnnPredict>;

/// n_train^2, n_train * n_test, epochs * n_per_epoch, n_test.
std::uint64_t n_ce(const ExecutionKind &kind);

std::string describe(const ExecutionKind &kind);

struct RuntimeEstimate {
    std::uint64_t n_ce = 0;
    double t_ce = 0.0;   // seconds per circuit execution
    double total = 0.0;  // seconds
};

/// total = n_ce(kind) * t_ce. Throws std::invalid_argument unless t_ce > 0.
RuntimeEstimate extrapolate_device_time(const ExecutionKind &kind, double t_ce);

/// Least-squares slope of log(y) against log(x). Needs >= 2 points, all positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace qpulsar

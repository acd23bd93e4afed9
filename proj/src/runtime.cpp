#include "qpulsar/runtime.hpp"

#include <cmath>
#include <stdexcept>

namespace qpulsar {

std::uint64_t n_ce(const ExecutionKind &kind) {
    struct Count {
        std::uint64_t operator()(const QsvmTrain &k) const { return k.n_train * k.n_train; }
        std::uint64_t operator()(const QsvmPredict &k) const { return k.n_train * k.n_test; }
        std::uint64_t operator()(const QcnnTrain &k) const { return k.epochs * k.n_per_epoch; }
        std::uint64_t operator()(const QcnnPredict &k) const { return k.n_test; }
    };
    return std::visit(Count{}, kind);
}

std::string describe(const ExecutionKind &kind) {
    struct Name {
        std::string operator()(const QsvmTrain &k) const { return "qsvm_train(n_train=" + std::to_string(k.n_train) + ")"; }
        std::string operator()(const QsvmPredict &k) const {
            return "qsvm_predict(n_train=" + std::to_string(k.n_train) + ", n_test=" + std::to_string(k.n_test) + ")";
        }
        std::string operator()(const QcnnTrain &k) const {
            return "qcnn_train(epochs=" + std::to_string(k.epochs) + ", n=" + std::to_string(k.n_per_epoch) + ")";
        }
        std::string operator()(const QcnnPredict &k) const { return "qcnn_predict(n_test=" + std::to_string(k.n_test) + ")"; }
    };
    return std::visit(Name{}, kind);
}

RuntimeEstimate extrapolate_device_time(const ExecutionKind &kind, double t_ce) {
    if (!(t_ce > 0.0)) {
        throw std::invalid_argument("time per circuit execution must be positive");
    }
    const std::uint64_t count = n_ce(kind);
    return {count, t_ce, static_cast<double>(count) * t_ce};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two (x, y) pairs");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::invalid_argument("log-log fit needs positive values");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    const double den = n * sxx - sx * sx;
    if (den == 0.0) {
        throw std::invalid_argument("slope fit needs at least two distinct x values");
    }
    return (n * sxy - sx * sy) / den;
}

}  // namespace qpulsar

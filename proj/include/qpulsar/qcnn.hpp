// QCNN forward pass, cross-entropy loss, parameter-shift gradients and training.

#pragma once

#include "qpulsar/circuits.hpp"
#include "qpulsar/data.hpp"
#include "qpulsar/statevector.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace qpulsar {

struct QcnnModel {
    QcnnArchitecture arch;
    std::vector<double> theta;  // two shared angles per conv layer
};

/// theta drawn uniformly from [-pi, pi).
QcnnModel init_model(const QcnnArchitecture &arch, std::uint64_t seed);

/// Probability of reading 1 on the final qubit. With `noise`, a trajectory estimate.
double forward(const QcnnModel &model, std::span<const double> x, const std::optional<NoiseConfig> &noise = {});

/// -[y log p + (1 - y) log(1 - p)] with p clamped to [eps, 1 - eps].
double bce_loss(double y_pred, int y, double eps = 1e-7);

/// d bce / d y_pred; zero where the clamp is active.
double bce_loss_derivative(double y_pred, int y, double eps = 1e-7);

struct GradientResult {
    std::vector<double> d_theta;  // d loss / d theta
    double y_pred = 0.0;
    double loss = 0.0;
    std::uint64_t shift_evaluations = 0;  // shifted circuits run
};

/// d y_pred / d theta by the parameter-shift rule. Every gate carrying a shared parameter is
/// shifted by +-pi/2 on its own and the halved differences are summed per parameter.
/// Noisy evaluations of one call share a trajectory seed.
std::vector<double> forward_gradient(const QcnnModel &model, std::span<const double> x,
                                     const std::optional<NoiseConfig> &noise = {},
                                     std::uint64_t *shift_evaluations = nullptr);

/// Loss gradient: forward_gradient chained with bce_loss_derivative.
GradientResult gradient(const QcnnModel &model, std::span<const double> x, int y, double eps = 1e-7,
                        const std::optional<NoiseConfig> &noise = {});

enum class BatchMode : std::uint8_t { Full, Balanced };
enum class Optimizer : std::uint8_t { GradientDescent, Adam };

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 150;
    BatchMode batch = BatchMode::Full;
    std::size_t batch_size = 10;
    std::uint64_t seed = 0;
    double loss_clamp = 1e-7;
    Optimizer optimizer = Optimizer::GradientDescent;
    std::optional<NoiseConfig> noise;

    void validate() const;
    nlohmann::json to_json() const;
};

struct LossHistory {
    std::vector<double> epoch_loss;  // mean loss over the epoch's samples, before the update
};

struct TrainResult {
    QcnnModel model;
    LossHistory history;
    std::uint64_t base_executions = 0;   // epochs x samples per epoch
    std::uint64_t shift_executions = 0;  // extra circuits run for parameter-shift gradients
};

/// Throws InsufficientData for an empty set or a single-class set in balanced mode.
TrainResult train(QcnnModel model, const Dataset &train_set, const TrainConfig &config);

/// 1 when forward >= threshold.
int predict(const QcnnModel &model, std::span<const double> x, double threshold = 0.5,
            const std::optional<NoiseConfig> &noise = {});

nlohmann::json to_json(const QcnnArchitecture &arch);
nlohmann::json to_json(const TrainResult &result, const TrainConfig &config);

}  // namespace qpulsar

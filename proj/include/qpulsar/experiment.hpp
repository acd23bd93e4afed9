// End-to-end seeded experiments: sample, train, predict, evaluate. Also the noise sweep
// and the wall-clock scaling benchmark built on top of single runs.

#pragma once

#include "qpulsar/data.hpp"
#include "qpulsar/metrics.hpp"
#include "qpulsar/qcnn.hpp"
#include "qpulsar/runtime.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qpulsar {

enum class Pipeline : std::uint8_t { Qsvm, Qcnn, QcnnBatched, Csvm };

std::string_view to_string(Pipeline pipeline);
std::optional<Pipeline> parse_pipeline(std::string_view name);

struct ExperimentConfig {
    std::size_t n_train = 200;
    std::size_t n_test = 400;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};

    // QCNN
    int epochs = 150;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::GradientDescent;
    std::size_t batch_size = 10;
    QcnnArchitecture architecture = QcnnArchitecture::pulsar_default();

    // SVMs
    double c = 1.0;
    double svm_tol = 1e-3;
    double rbf_gamma = 1.0 / 8.0;

    // Bit-flip noise on every circuit evaluation when > 0.
    double noise_p = 0.0;
    int trajectories = 1024;
    // Trajectories per noisy QCNN training evaluation; 0 means `trajectories`.
    int qcnn_train_trajectories = 0;

    bool stratified_test = false;
    std::optional<std::filesystem::path> kernel_cache;

    void validate() const;
    nlohmann::json to_json() const;
};

struct SeedResult {
    std::uint64_t seed = 0;
    ConfusionMatrix confusion;
    MetricsReport metrics;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    std::uint64_t train_executions = 0;    // runtime-model count (n_ce)
    std::uint64_t predict_executions = 0;  // runtime-model count (n_ce)
    std::uint64_t shift_executions = 0;    // QCNN parameter-shift circuits, reported separately
    std::vector<double> loss_history;      // QCNN only

    nlohmann::json to_json(bool include_timing) const;
};

struct SeedSets {
    Dataset train;
    Dataset test;
};

/// The training and test draws a seeded run uses.
SeedSets draw_sets(const Dataset &normalized, const ExperimentConfig &config, std::uint64_t seed);

/// One seeded run on an angle-normalized dataset: 70:30 split, balanced training draw,
/// uniform test draw, fit, predict, score.
SeedResult run_seed(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &config, std::uint64_t seed);

struct ExperimentResult {
    Pipeline pipeline = Pipeline::Qsvm;
    std::vector<SeedResult> runs;
    RunAggregate aggregate;

    nlohmann::json to_json(bool include_timing) const;
};

ExperimentResult run_experiment(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &config);

struct NoiseSweepRow {
    Pipeline pipeline = Pipeline::Qsvm;
    double p = 0.0;
    MetricSummary balanced_accuracy;  // spread reported as stddev
    std::vector<double> per_seed;     // balanced accuracy per defined run, seed order
};

/// Balanced accuracy for every (p, pipeline), p-major order. `base` supplies sizes, seeds,
/// trajectories and training settings; its noise_p is overridden.
std::vector<NoiseSweepRow> noise_sweep(const Dataset &normalized, std::span<const double> p_list,
                                       std::span<const Pipeline> pipelines, const ExperimentConfig &base);

inline constexpr int kPredictRoundsPerRepetition = 5;

struct BenchmarkRow {
    Pipeline pipeline = Pipeline::Qsvm;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double train_seconds = 0.0;    // median over repetitions
    double predict_seconds = 0.0;  // median over prediction rounds
    std::uint64_t train_executions = 0;
    std::uint64_t predict_executions = 0;
    double train_seconds_min = 0.0;  // fastest repetition; least affected by host contention
    double predict_seconds_min = 0.0;
};

/// Wall-clock train/predict times of `pipeline` for each training size (ascending): median over
/// repetitions, sizes interleaved within each repetition, after one untimed warm-up run.
/// Prediction is timed separately in kPredictRoundsPerRepetition * repetitions interleaved
/// rounds over the models fitted in the last repetition.
BenchmarkRow benchmark_point(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &base,
                             std::size_t n_train, int repetitions);
std::vector<BenchmarkRow> wall_benchmark(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &base,
                                         std::span<const std::size_t> sizes, int repetitions = 3);

/// Device-time extrapolation of a benchmark row: QSVM at 3.33 s per execution; QCNN at
/// 142.00 s per execution with training reduced to 10 epochs.
struct DeviceEstimate {
    RuntimeEstimate train;
    RuntimeEstimate predict;
};
DeviceEstimate extrapolate_row(const BenchmarkRow &row, std::size_t batch_size);

/// Smallest measured size where QCNN training is faster than QSVM training, if any.
std::optional<std::size_t> training_crossover(std::span<const BenchmarkRow> qsvm, std::span<const BenchmarkRow> qcnn);

}  // namespace qpulsar

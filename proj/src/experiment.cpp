#include "qpulsar/experiment.hpp"

#include "qpulsar/kernel.hpp"
#include "qpulsar/svm.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace qpulsar {

namespace {

// Independent random streams per run.
enum Stream : std::uint64_t {
    kSplit = 10,
    kTrainDraw,
    kTestDraw,
    kInit,
    kTrain,
    kGramNoise,
    kCrossNoise,
    kQcnnTrainNoise,
    kQcnnPredictNoise,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string cache_tag(double p) {
    std::ostringstream s;
    s << p;
    return s.str();
}

KernelMatrix cached_kernel(const std::optional<std::filesystem::path> &dir, const std::string &name,
                           std::uint64_t executions, const auto &compute) {
    if (dir) {
        const auto path = *dir / name;
        if (std::filesystem::exists(path)) {
            return {read_matrix_csv(path), executions};
        }
        KernelMatrix k = compute();
        std::filesystem::create_directories(*dir);
        write_matrix_csv(k.values, path);
        return k;
    }
    return compute();
}

std::optional<NoiseConfig> noise_for(const ExperimentConfig &config, std::uint64_t seed) {
    if (config.noise_p <= 0.0) {
        return std::nullopt;
    }
    return NoiseConfig{config.noise_p, config.trajectories, seed};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(Pipeline pipeline) {
    switch (pipeline) {
        case Pipeline::Qsvm:
            return "qsvm";
        case Pipeline::Qcnn:
            return "qcnn";
        case Pipeline::QcnnBatched:
            return "qcnn-batched";
        case Pipeline::Csvm:
            return "csvm";
    }
    return "?";
}

std::optional<Pipeline> parse_pipeline(std::string_view name) {
    for (const Pipeline p : {Pipeline::Qsvm, Pipeline::Qcnn, Pipeline::QcnnBatched, Pipeline::Csvm}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (n_train < 2 || n_train % 2 != 0) {
        throw std::invalid_argument("n_train must be even and at least 2");
    }
    if (n_test < 1) {
        throw std::invalid_argument("n_test must be at least 1");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("at least one seed is required");
    }
    if (!(noise_p >= 0.0 && noise_p <= 1.0)) {
        throw std::invalid_argument("noise p must lie in [0, 1]");
    }
    if (trajectories < 1 || qcnn_train_trajectories < 0) {
        throw std::invalid_argument("trajectories must be >= 1");
    }
    if (!(c > 0.0) || !(svm_tol > 0.0) || !(rbf_gamma > 0.0)) {
        throw std::invalid_argument("C, tol and gamma must be positive");
    }
    if (epochs < 1 || !(learning_rate >= 0.0)) {
        throw std::invalid_argument("epochs must be >= 1 and learning rate non-negative");
    }
    architecture.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
    return {
        {"n_train", n_train},
        {"n_test", n_test},
        {"seeds", seeds},
        {"epochs", epochs},
        {"learning_rate", learning_rate},
        {"optimizer", optimizer == Optimizer::GradientDescent ? "gd" : "adam"},
        {"batch_size", batch_size},
        {"architecture", qpulsar::to_json(architecture)},
        {"c", c},
        {"svm_tol", svm_tol},
        {"rbf_gamma", rbf_gamma},
        {"noise_p", noise_p},
        {"trajectories", trajectories},
        {"qcnn_train_trajectories", qcnn_train_trajectories > 0 ? qcnn_train_trajectories : trajectories},
        {"stratified_test", stratified_test},
        {"kernel_cache", kernel_cache ? nlohmann::json(kernel_cache->string()) : nlohmann::json(nullptr)},
    };
}

nlohmann::json SeedResult::to_json(bool include_timing) const {
    nlohmann::json j = {
        {"seed", seed},
        {"confusion", confusion.to_json()},
        {"metrics", metrics.to_json()},
        {"train_executions", train_executions},
        {"predict_executions", predict_executions},
        {"shift_executions", shift_executions},
    };
    if (!loss_history.empty()) {
        j["loss_history"] = loss_history;
    }
    if (include_timing) {
        j["train_seconds"] = train_seconds;
        j["predict_seconds"] = predict_seconds;
    }
    return j;
}

SeedSets draw_sets(const Dataset &normalized, const ExperimentConfig &config, std::uint64_t seed) {
    const SplitPools pools = split_70_30(normalized, mix_seed(seed, kSplit));
    return {sample_balanced(pools.train_pool, config.n_train, mix_seed(seed, kTrainDraw)),
            sample_test(pools.test_pool, config.n_test, mix_seed(seed, kTestDraw), config.stratified_test)};
}

namespace {

// Training outcome plus a repeatable prediction pass over the seed's test set.
struct FittedRun {
    SeedResult result;
    std::function<std::vector<int>()> predict;
    std::vector<int> y_test;
    std::uint64_t predict_executions = 0;
};

FittedRun fit_seed(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &config,
                   std::uint64_t seed) {
    config.validate();
    const auto [train_set, test_set] = draw_sets(normalized, config, seed);
    auto x_train = train_set.features();
    const auto y_train = train_set.labels();
    auto x_test = test_set.features();

    FittedRun fit;
    fit.result.seed = seed;
    fit.y_test = test_set.labels();

    switch (pipeline) {
        case Pipeline::Qsvm: {
            const auto gram_noise = noise_for(config, mix_seed(seed, kGramNoise));
            const auto cross_noise = noise_for(config, mix_seed(seed, kCrossNoise));
            const KernelMode gram_mode = gram_noise ? KernelMode::noisy(*gram_noise) : KernelMode::exact();
            const KernelMode cross_mode = cross_noise ? KernelMode::noisy(*cross_noise) : KernelMode::exact();
            const std::string suffix = "_seed" + std::to_string(seed) + "_p" + cache_tag(config.noise_p) + "_t" +
                                       std::to_string(config.trajectories);

            const auto start = Clock::now();
            const KernelMatrix gram = cached_kernel(
                config.kernel_cache, "gram_n" + std::to_string(x_train.size()) + suffix + ".csv",
                n_ce(QsvmTrain{x_train.size()}), [&] { return gram_matrix(x_train, gram_mode); });
            SvmModel model = svm_fit(gram.values, y_train, {config.c, config.svm_tol});
            fit.result.train_seconds = seconds_since(start);
            fit.result.train_executions = gram.executions;

            const std::string cross_name =
                "cross_n" + std::to_string(x_train.size()) + "_m" + std::to_string(x_test.size()) + suffix + ".csv";
            fit.predict_executions = n_ce(QsvmPredict{x_train.size(), x_test.size()});
            fit.predict = [cache = config.kernel_cache, cross_name, executions = fit.predict_executions,
                           x_train = std::move(x_train), x_test = std::move(x_test), cross_mode,
                           model = std::move(model)] {
                const KernelMatrix cross = cached_kernel(cache, cross_name, executions,
                                                         [&] { return cross_kernel(x_train, x_test, cross_mode); });
                std::vector<int> out(x_test.size());
                for (std::size_t i = 0; i < x_test.size(); ++i) {
                    out[i] = svm_predict(model, cross.values.row(i));
                }
                return out;
            };
            break;
        }
        case Pipeline::Qcnn:
        case Pipeline::QcnnBatched: {
            TrainConfig tc;
            tc.learning_rate = config.learning_rate;
            tc.epochs = config.epochs;
            tc.batch = pipeline == Pipeline::QcnnBatched ? BatchMode::Balanced : BatchMode::Full;
            tc.batch_size = config.batch_size;
            tc.seed = mix_seed(seed, kTrain);
            tc.optimizer = config.optimizer;
            tc.noise = noise_for(config, mix_seed(seed, kQcnnTrainNoise));
            if (tc.noise && config.qcnn_train_trajectories > 0) {
                tc.noise->trajectories = config.qcnn_train_trajectories;
            }

            const auto start = Clock::now();
            TrainResult trained = train(init_model(config.architecture, mix_seed(seed, kInit)), train_set, tc);
            fit.result.train_seconds = seconds_since(start);
            fit.result.train_executions = trained.base_executions;
            fit.result.shift_executions = trained.shift_executions;
            fit.result.loss_history = trained.history.epoch_loss;

            fit.predict_executions = n_ce(QcnnPredict{x_test.size()});
            fit.predict = [model = std::move(trained.model), x_test = std::move(x_test), config,
                           predict_base = mix_seed(seed, kQcnnPredictNoise)] {
                std::vector<int> out(x_test.size());
                for (std::size_t i = 0; i < x_test.size(); ++i) {
                    out[i] = predict(model, x_test[i], 0.5, noise_for(config, mix_seed(predict_base, i)));
                }
                return out;
            };
            break;
        }
        case Pipeline::Csvm: {
            const auto start = Clock::now();
            SvmModel model = svm_fit(rbf_gram(x_train, config.rbf_gamma), y_train, {config.c, config.svm_tol});
            fit.result.train_seconds = seconds_since(start);
            fit.predict = [model = std::move(model), x_train = std::move(x_train), x_test = std::move(x_test),
                           gamma = config.rbf_gamma] {
                const Matrix cross = rbf_cross(x_train, x_test, gamma);
                std::vector<int> out(x_test.size());
                for (std::size_t i = 0; i < x_test.size(); ++i) {
                    out[i] = svm_predict(model, cross.row(i));
                }
                return out;
            };
            break;
        }
    }
    return fit;
}

double timed_predict(const FittedRun &fit) {
    const auto start = Clock::now();
    static_cast<void>(fit.predict());
    return seconds_since(start);
}

}  // namespace

SeedResult run_seed(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &config, std::uint64_t seed) {
    FittedRun fit = fit_seed(pipeline, normalized, config, seed);
    SeedResult result = std::move(fit.result);
    const auto start = Clock::now();
    const std::vector<int> predictions = fit.predict();
    result.predict_seconds = seconds_since(start);
    result.predict_executions = fit.predict_executions;
    result.confusion = confusion(predictions, fit.y_test);
    result.metrics = metrics(result.confusion);
    return result;
}

nlohmann::json ExperimentResult::to_json(bool include_timing) const {
    nlohmann::json runs_json = nlohmann::json::array();
    for (const auto &r : runs) {
        runs_json.push_back(r.to_json(include_timing));
    }
    nlohmann::json j = {{"pipeline", to_string(pipeline)}, {"runs", runs_json}, {"aggregate", aggregate.to_json()}};
    if (include_timing) {
        std::vector<double> train_t, predict_t;
        for (const auto &r : runs) {
            train_t.push_back(r.train_seconds);
            predict_t.push_back(r.predict_seconds);
        }
        const auto ts = summarize_values(train_t);
        const auto ps = summarize_values(predict_t);
        j["timing"] = {{"train_seconds_mean", ts.mean},
                       {"train_seconds_se", ts.standard_error},
                       {"predict_seconds_mean", ps.mean},
                       {"predict_seconds_se", ps.standard_error}};
    }
    return j;
}

ExperimentResult run_experiment(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &config) {
    config.validate();
    ExperimentResult out;
    out.pipeline = pipeline;
    std::vector<MetricsReport> reports;
    for (const std::uint64_t seed : config.seeds) {
        out.runs.push_back(run_seed(pipeline, normalized, config, seed));
        reports.push_back(out.runs.back().metrics);
    }
    out.aggregate = aggregate_runs(reports);
    return out;
}

std::vector<NoiseSweepRow> noise_sweep(const Dataset &normalized, std::span<const double> p_list,
                                       std::span<const Pipeline> pipelines, const ExperimentConfig &base) {
    for (const double p : p_list) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("noise probabilities must lie in [0, 1]");
        }
    }
    std::vector<NoiseSweepRow> rows;
    for (const double p : p_list) {
        for (const Pipeline pipeline : pipelines) {
            ExperimentConfig cfg = base;
            cfg.noise_p = p;
            const ExperimentResult res = run_experiment(pipeline, normalized, cfg);
            NoiseSweepRow row;
            row.pipeline = pipeline;
            row.p = p;
            for (const auto &r : res.runs) {
                if (r.metrics.balanced_accuracy) {
                    row.per_seed.push_back(*r.metrics.balanced_accuracy);
                }
            }
            row.balanced_accuracy = res.aggregate["balanced_accuracy"];
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

FittedRun benchmark_fit(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &base,
                        std::size_t n_train) {
    ExperimentConfig cfg = base;
    cfg.n_train = n_train;
    cfg.kernel_cache.reset();
    return fit_seed(pipeline, normalized, cfg, cfg.seeds.front());
}

void require_repetitions(int repetitions) {
    if (repetitions < 1) {
        throw std::invalid_argument("repetitions must be >= 1");
    }
}

}  // namespace

BenchmarkRow benchmark_point(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &base,
                             std::size_t n_train, int repetitions) {
    const std::vector<std::size_t> one = {n_train};
    return wall_benchmark(pipeline, normalized, base, one, repetitions).front();
}

std::vector<BenchmarkRow> wall_benchmark(Pipeline pipeline, const Dataset &normalized, const ExperimentConfig &base,
                                         std::span<const std::size_t> sizes, int repetitions) {
    require_repetitions(repetitions);
    if (sizes.empty()) {
        throw std::invalid_argument("benchmark needs at least one training size");
    }
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw std::invalid_argument("benchmark sizes must be ascending");
    }
    // Untimed pass so first-touch allocation and cache warm-up stay out of the first row.
    timed_predict(benchmark_fit(pipeline, normalized, base, sizes.front()));
    // Sizes are interleaved within each repetition so slow phases of the host hit every size alike.
    std::vector<std::vector<double>> train_t(sizes.size());
    std::vector<std::vector<double>> predict_t(sizes.size());
    std::vector<FittedRun> fits(sizes.size());
    for (int r = 0; r < repetitions; ++r) {
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            fits[k] = benchmark_fit(pipeline, normalized, base, sizes[k]);
            train_t[k].push_back(fits[k].result.train_seconds);
        }
    }
    // Prediction is far shorter than training, so it gets its own rounds over the last fitted models.
    for (int r = 0; r < kPredictRoundsPerRepetition * repetitions; ++r) {
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            predict_t[k].push_back(timed_predict(fits[k]));
        }
    }
    std::vector<BenchmarkRow> rows;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        BenchmarkRow row{pipeline,
                         sizes[k],
                         base.n_test,
                         median(train_t[k]),
                         median(predict_t[k]),
                         fits[k].result.train_executions,
                         fits[k].predict_executions};
        row.train_seconds_min = *std::min_element(train_t[k].begin(), train_t[k].end());
        row.predict_seconds_min = *std::min_element(predict_t[k].begin(), predict_t[k].end());
        rows.push_back(row);
    }
    return rows;
}

DeviceEstimate extrapolate_row(const BenchmarkRow &row, std::size_t batch_size) {
    switch (row.pipeline) {
        case Pipeline::Qsvm:
            return {extrapolate_device_time(QsvmTrain{row.n_train}, kDeviceSecondsQsvm),
                    extrapolate_device_time(QsvmPredict{row.n_train, row.n_test}, kDeviceSecondsQsvm)};
        case Pipeline::Qcnn:
            return {extrapolate_device_time(QcnnTrain{kDeviceQcnnEpochs, row.n_train}, kDeviceSecondsQcnn),
                    extrapolate_device_time(QcnnPredict{row.n_test}, kDeviceSecondsQcnn)};
        case Pipeline::QcnnBatched:
            return {extrapolate_device_time(QcnnTrain{kDeviceQcnnEpochs, batch_size}, kDeviceSecondsQcnn),
                    extrapolate_device_time(QcnnPredict{row.n_test}, kDeviceSecondsQcnn)};
        case Pipeline::Csvm:
            break;
    }
    return {};
}

std::optional<std::size_t> training_crossover(std::span<const BenchmarkRow> qsvm, std::span<const BenchmarkRow> qcnn) {
    std::optional<std::size_t> best;
    for (const auto &a : qsvm) {
        for (const auto &b : qcnn) {
            if (a.n_train == b.n_train && b.train_seconds < a.train_seconds && (!best || a.n_train < *best)) {
                best = a.n_train;
            }
        }
    }
    return best;
}

}  // namespace qpulsar

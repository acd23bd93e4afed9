#include "qpulsar/errors.hpp"
#include "qpulsar/experiment.hpp"
#include "qpulsar/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <set>

using namespace qpulsar;

namespace {

const Dataset &small_data() {
    static const Dataset d = normalize_to_angle(synthesize_htru2_like(600, 120, 7));
    return d;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n_train = 20;
    cfg.n_test = 30;
    cfg.seeds = {0, 1};
    cfg.epochs = 5;
    return cfg;
}

}  // namespace

TEST_CASE("pipeline names round-trip") {
    for (const Pipeline p : {Pipeline::Qsvm, Pipeline::Qcnn, Pipeline::QcnnBatched, Pipeline::Csvm}) {
        CHECK(parse_pipeline(to_string(p)) == p);
    }
    CHECK_FALSE(parse_pipeline("svm").has_value());
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_train = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.noise_p = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.n_test = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("synthetic stand-in has the requested shape") {
    const Dataset raw = synthesize_htru2_like(50, 10, 1);
    CHECK(raw.size() == 60);
    CHECK(raw.count(0) == 50);
    CHECK(raw.count(1) == 10);
    CHECK(raw.samples.front().label == 0);
    CHECK(raw.samples.back().label == 1);
    CHECK(synthesize_htru2_like(50, 10, 1).samples == raw.samples);
    for (const auto &s : raw.samples) {
        REQUIRE(s.features.size() == kHtru2Features);
    }
}

TEST_CASE("seeded draws: balanced training set, disjoint test set, reproducible") {
    const ExperimentConfig cfg = small_config();
    const SeedSets a = draw_sets(small_data(), cfg, 3);
    CHECK(a.train.size() == 20);
    CHECK(a.train.count(1) == 10);
    CHECK(a.test.size() == 30);
    std::set<std::size_t> train_rows;
    for (const auto &s : a.train.samples) {
        train_rows.insert(s.source_row);
    }
    for (const auto &s : a.test.samples) {
        CHECK(train_rows.count(s.source_row) == 0);
    }
    const SeedSets b = draw_sets(small_data(), cfg, 3);
    CHECK(a.train.samples == b.train.samples);
    CHECK(a.test.samples == b.test.samples);
    CHECK(draw_sets(small_data(), cfg, 4).train.samples != a.train.samples);
}

TEST_CASE("every pipeline reports the runtime-model execution counts") {
    const ExperimentConfig cfg = small_config();
    const SeedResult qsvm = run_seed(Pipeline::Qsvm, small_data(), cfg, 0);
    CHECK(qsvm.train_executions == 400);
    CHECK(qsvm.predict_executions == 600);
    CHECK(qsvm.confusion.total() == 30);

    const SeedResult qcnn = run_seed(Pipeline::Qcnn, small_data(), cfg, 0);
    CHECK(qcnn.train_executions == 100);
    CHECK(qcnn.predict_executions == 30);
    CHECK(qcnn.shift_executions == 100 * 56);
    CHECK(qcnn.loss_history.size() == 5);

    const SeedResult batched = run_seed(Pipeline::QcnnBatched, small_data(), cfg, 0);
    CHECK(batched.train_executions == 50);
    CHECK(batched.predict_executions == 30);

    const SeedResult csvm = run_seed(Pipeline::Csvm, small_data(), cfg, 0);
    CHECK(csvm.train_executions == 0);
    CHECK(csvm.confusion.total() == 30);
}

TEST_CASE("runs are reproducible and the JSON is timing-free on request") {
    const ExperimentConfig cfg = small_config();
    for (const Pipeline p : {Pipeline::Qsvm, Pipeline::QcnnBatched}) {
        const ExperimentResult a = run_experiment(p, small_data(), cfg);
        const ExperimentResult b = run_experiment(p, small_data(), cfg);
        CHECK(a.to_json(false).dump() == b.to_json(false).dump());
        CHECK(a.runs.size() == 2);
        CHECK(a.aggregate.runs == 2);
        CHECK(a.to_json(false).dump().find("seconds") == std::string::npos);
        CHECK(a.to_json(true).dump().find("seconds") != std::string::npos);
    }
}

TEST_CASE("noisy QSVM run at p = 0 equals the exact run") {
    ExperimentConfig cfg = small_config();
    const SeedResult exact = run_seed(Pipeline::Qsvm, small_data(), cfg, 1);
    cfg.noise_p = 0.0;
    cfg.trajectories = 8;
    CHECK(run_seed(Pipeline::Qsvm, small_data(), cfg, 1).confusion == exact.confusion);
}

TEST_CASE("kernel cache is written once and reused") {
    ExperimentConfig cfg = small_config();
    const auto dir = std::filesystem::temp_directory_path() / "qpulsar_kernel_cache_test";
    std::filesystem::remove_all(dir);
    cfg.kernel_cache = dir;
    const SeedResult first = run_seed(Pipeline::Qsvm, small_data(), cfg, 0);
    CHECK(std::filesystem::exists(dir));
    const auto files = std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{});
    CHECK(files == 2);
    const SeedResult second = run_seed(Pipeline::Qsvm, small_data(), cfg, 0);
    CHECK(second.confusion == first.confusion);
    cfg.kernel_cache.reset();
    CHECK(run_seed(Pipeline::Qsvm, small_data(), cfg, 0).confusion == first.confusion);
    std::filesystem::remove_all(dir);
}

TEST_CASE("noise sweep is p-major and p = 0.5 QCNN reads chance") {
    ExperimentConfig cfg = small_config();
    cfg.trajectories = 16;
    cfg.qcnn_train_trajectories = 2;
    cfg.epochs = 2;
    const std::vector<double> ps = {0.0, 0.5};
    const std::vector<Pipeline> pipes = {Pipeline::Qsvm, Pipeline::QcnnBatched};
    const auto rows = noise_sweep(small_data(), ps, pipes, cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].p == 0.0);
    CHECK(rows[0].pipeline == Pipeline::Qsvm);
    CHECK(rows[1].pipeline == Pipeline::QcnnBatched);
    CHECK(rows[2].p == 0.5);
    for (const auto &r : rows) {
        CHECK(r.per_seed.size() == 2);
        CHECK(r.balanced_accuracy.defined == 2);
    }
    // A constant kernel gives every test point the same decision.
    CHECK(rows[2].balanced_accuracy.mean == 0.5);
    CHECK(rows[2].balanced_accuracy.stddev == 0.0);
    // Every noisy QCNN output is exactly 1/2, which the inclusive threshold sends to class 1.
    CHECK(rows[3].balanced_accuracy.mean == 0.5);
    CHECK(rows[3].balanced_accuracy.stddev == 0.0);
}

TEST_CASE("benchmark rows carry counts and device extrapolations") {
    ExperimentConfig cfg = small_config();
    cfg.seeds = {0};
    const std::vector<std::size_t> sizes = {10, 20};
    const auto qsvm = wall_benchmark(Pipeline::Qsvm, small_data(), cfg, sizes, 1);
    REQUIRE(qsvm.size() == 2);
    CHECK(qsvm[1].n_train == 20);
    CHECK(qsvm[1].train_executions == 400);
    CHECK(qsvm[1].predict_executions == 600);
    const DeviceEstimate dev = extrapolate_row(qsvm[1], cfg.batch_size);
    CHECK(dev.train.total == doctest::Approx(400 * 3.33).epsilon(1e-12));

    const BenchmarkRow qcnn{Pipeline::Qcnn, 200, 400, 1.0, 0.1, 30000, 400};
    const DeviceEstimate qd = extrapolate_row(qcnn, 10);
    CHECK(qd.train.n_ce == 2000);
    CHECK(qd.train.total == doctest::Approx(284000.0).epsilon(1e-12));
    CHECK(qd.predict.n_ce == 400);
    const BenchmarkRow batched{Pipeline::QcnnBatched, 200, 400, 1.0, 0.1, 1500, 400};
    CHECK(extrapolate_row(batched, 10).train.n_ce == 100);

    const std::vector<std::size_t> unsorted = {20, 10};
    CHECK_THROWS_AS(wall_benchmark(Pipeline::Qsvm, small_data(), cfg, unsorted, 1), std::invalid_argument);
}

TEST_CASE("training crossover picks the first size where QCNN trains faster") {
    const std::vector<BenchmarkRow> qsvm = {{Pipeline::Qsvm, 10, 4, 0.1, 0, 0, 0},
                                            {Pipeline::Qsvm, 20, 4, 0.5, 0, 0, 0},
                                            {Pipeline::Qsvm, 40, 4, 2.0, 0, 0, 0}};
    const std::vector<BenchmarkRow> qcnn = {{Pipeline::Qcnn, 10, 4, 0.3, 0, 0, 0},
                                            {Pipeline::Qcnn, 20, 4, 0.6, 0, 0, 0},
                                            {Pipeline::Qcnn, 40, 4, 1.2, 0, 0, 0}};
    CHECK(training_crossover(qsvm, qcnn) == std::optional<std::size_t>{40});
    CHECK_FALSE(training_crossover(std::span(qsvm).first(2), std::span(qcnn).first(2)).has_value());
}

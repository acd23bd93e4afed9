// qpulsar: seeded pulsar-classification experiments on the HTRU-2 candidate table.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or input-parse error.

#include "qpulsar/errors.hpp"
#include "qpulsar/experiment.hpp"
#include "qpulsar/synthetic.hpp"
#include "qpulsar/version.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpulsar;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string data;
    std::size_t n_train = 200;
    std::size_t n_test = 400;
    std::vector<std::uint64_t> seeds;
    int epochs = 150;
    double lr = 0.01;
    std::string batch;
    double noise_p = 0.0;
    int trajectories = 1024;
    int train_trajectories = 0;
    double c = 1.0;
    std::string optimizer = "gd";
    bool stratified_test = false;
    std::string out = "results";
    bool stable_output = false;
    std::string kernel_cache;
};

void add_common(CLI::App &cmd, CommonOptions &o, bool with_sizes) {
    cmd.add_option("--data", o.data, "HTRU-2 CSV (8 features + 0/1 label, no header)")->required();
    if (with_sizes) {
        cmd.add_option("--n-train", o.n_train, "balanced training-set size (even)")->capture_default_str();
    }
    cmd.add_option("--n-test", o.n_test, "test-set size")->capture_default_str();
    cmd.add_option("--seeds", o.seeds, "comma-separated seeds")->delimiter(',');
    cmd.add_option("--epochs", o.epochs, "QCNN epochs")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--lr", o.lr, "QCNN learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--optimizer", o.optimizer, "QCNN optimizer")
        ->capture_default_str()
        ->check(CLI::IsMember({"gd", "adam"}));
    cmd.add_option("--trajectories", o.trajectories, "Monte-Carlo trajectories per noisy circuit")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--train-trajectories", o.train_trajectories,
                   "trajectories per noisy QCNN training evaluation (0: same as --trajectories)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--c", o.c, "SVM box constraint")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_flag("--stratified-test", o.stratified_test, "keep the pool's class ratio in the test draw");
    cmd.add_option("--out", o.out, "output root directory")->capture_default_str();
    cmd.add_flag("--stable-output", o.stable_output, "fixed directory name and no timing fields");
}

ExperimentConfig to_config(const CommonOptions &o, std::size_t default_seed_count) {
    ExperimentConfig cfg;
    cfg.n_train = o.n_train;
    cfg.n_test = o.n_test;
    if (o.seeds.empty()) {
        cfg.seeds.clear();
        for (std::uint64_t s = 0; s < default_seed_count; ++s) {
            cfg.seeds.push_back(s);
        }
    } else {
        cfg.seeds = o.seeds;
    }
    cfg.epochs = o.epochs;
    cfg.learning_rate = o.lr;
    cfg.optimizer = o.optimizer == "adam" ? Optimizer::Adam : Optimizer::GradientDescent;
    cfg.c = o.c;
    cfg.noise_p = o.noise_p;
    cfg.trajectories = o.trajectories;
    cfg.qcnn_train_trajectories = o.train_trajectories;
    cfg.stratified_test = o.stratified_test;
    if (!o.kernel_cache.empty()) {
        cfg.kernel_cache = fs::path(o.kernel_cache);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    return cfg;
}

Dataset load_normalized(const std::string &path) { return normalize_to_angle(load_htru2(path)); }

fs::path make_output_dir(const CommonOptions &o, const std::string &command) {
    std::string name = command;
    if (!o.stable_output) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm utc{};
        gmtime_r(&now, &utc);
        std::ostringstream stamp;
        stamp << std::put_time(&utc, "%Y%m%dT%H%M%SZ");
        name += "-" + stamp.str();
    }
    const fs::path dir = fs::path(o.out) / name;
    fs::create_directories(dir);
    return dir;
}

json provenance(const std::string &command, const CommonOptions &o, const ExperimentConfig &cfg) {
    return {{"version", kVersion}, {"command", command}, {"data", o.data}, {"seeds", cfg.seeds},
            {"config", cfg.to_json()}};
}

// Shortest round-trip text for a number; empty for an undefined value.
std::string cell(const std::optional<double> &v) { return v ? json(*v).dump() : std::string(); }
std::string cell(double v) { return json(v).dump(); }

void write_json(const fs::path &path, const json &j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

// CSV preceded by '#' comment lines carrying version and config.
class CsvWriter {
public:
    CsvWriter(const fs::path &path, const json &prov) : out_(path), path_(path) {
        out_ << "# version: " << kVersion << '\n' << "# provenance: " << prov.dump() << '\n';
    }
    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << '\n';
    }
    ~CsvWriter() {
        out_.flush();
        if (!out_) {
            std::cerr << "error: cannot write " << path_ << '\n';
        }
    }

private:
    std::ofstream out_;
    fs::path path_;
};

Pipeline parse_pipeline_or_usage(const std::string &name) {
    const auto p = parse_pipeline(name);
    if (!p) {
        throw UsageError("unknown pipeline '" + name + "' (qsvm, qcnn, qcnn-batched, csvm)");
    }
    return *p;
}

Pipeline apply_batch_flag(Pipeline p, const std::string &batch) {
    if (batch.empty()) {
        return p;
    }
    if (p == Pipeline::Qcnn && batch == "balanced10") {
        return Pipeline::QcnnBatched;
    }
    if (p == Pipeline::QcnnBatched && batch == "full") {
        throw UsageError("--batch full conflicts with pipeline qcnn-batched");
    }
    return p;
}

int cmd_validate_data(const std::string &path) {
    const Dataset d = load_htru2(path);
    std::cout << json{{"version", kVersion}, {"data", path}, {"summary", summarize(d).to_json()}}.dump(2) << '\n';
    return 0;
}

int cmd_synth_data(const std::string &path, std::size_t negatives, std::size_t positives, std::uint64_t seed) {
    write_htru2(synthesize_htru2_like(negatives, positives, seed), path);
    std::cout << "wrote " << negatives + positives << " synthetic rows to " << path << '\n';
    return 0;
}

int cmd_run(const std::string &pipeline_name, const CommonOptions &o, bool export_sets) {
    const Pipeline pipeline = apply_batch_flag(parse_pipeline_or_usage(pipeline_name), o.batch);
    const ExperimentConfig cfg = to_config(o, 6);
    const Dataset data = load_normalized(o.data);
    const fs::path dir = make_output_dir(o, "run-" + std::string(to_string(pipeline)));
    const std::string name(to_string(pipeline));
    const json prov = provenance("run " + name, o, cfg);
    const bool timing = !o.stable_output;

    const ExperimentResult result = run_experiment(pipeline, data, cfg);

    json report = prov;
    report["normalization"] = data.normalization->to_json();
    report["result"] = result.to_json(timing);
    write_json(dir / (name + ".json"), report);

    {
        CsvWriter runs(dir / (name + "_runs.csv"), prov);
        std::vector<std::string> header = {"seed", "tp", "tn", "fp", "fn"};
        header.insert(header.end(), kMetricNames.begin(), kMetricNames.end());
        header.insert(header.end(), {"train_ce", "predict_ce", "shift_ce"});
        if (timing) {
            header.insert(header.end(), {"train_seconds", "predict_seconds"});
        }
        runs.row(header);
        for (const auto &r : result.runs) {
            std::vector<std::string> row = {std::to_string(r.seed), std::to_string(r.confusion.tp),
                                            std::to_string(r.confusion.tn), std::to_string(r.confusion.fp),
                                            std::to_string(r.confusion.fn)};
            for (const auto &v : r.metrics.values()) {
                row.push_back(cell(v));
            }
            row.insert(row.end(), {std::to_string(r.train_executions), std::to_string(r.predict_executions),
                                   std::to_string(r.shift_executions)});
            if (timing) {
                row.insert(row.end(), {cell(r.train_seconds), cell(r.predict_seconds)});
            }
            runs.row(row);
        }
    }
    {
        CsvWriter summary(dir / (name + "_metrics.csv"), prov);
        summary.row({"metric", "mean", "standard_error", "defined", "undefined"});
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            const MetricSummary &s = result.aggregate.metrics[m];
            summary.row({std::string(kMetricNames[m]), cell(s.mean), cell(s.standard_error),
                         std::to_string(s.defined), std::to_string(s.undefined)});
        }
    }
    if (export_sets) {
        const fs::path sets = dir / "sets";
        fs::create_directories(sets);
        for (const std::uint64_t seed : cfg.seeds) {
            const SeedSets drawn = draw_sets(data, cfg, seed);
            const std::string tag = "seed" + std::to_string(seed);
            write_htru2(drawn.train, sets / ("train_" + tag + ".csv"));
            write_htru2(drawn.test, sets / ("test_" + tag + ".csv"));
            write_json(sets / (tag + ".json"), {{"version", kVersion},
                                                {"seed", seed},
                                                {"normalized_before_split", true},
                                                {"normalization", data.normalization->to_json()}});
        }
    }

    const auto &agg = result.aggregate;
    std::cout << name << " over " << agg.runs << " seeds -> " << dir.string() << '\n';
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        std::cout << "  " << std::left << std::setw(18) << kMetricNames[m] << std::fixed << std::setprecision(3)
                  << agg.metrics[m].mean << " +- " << agg.metrics[m].standard_error << '\n';
    }
    return 0;
}

std::vector<Pipeline> parse_pipelines(const std::vector<std::string> &names) {
    std::vector<Pipeline> out;
    for (const auto &n : names) {
        out.push_back(parse_pipeline_or_usage(n));
    }
    if (out.empty()) {
        throw UsageError("at least one pipeline is required");
    }
    return out;
}

int cmd_noise_sweep(const CommonOptions &o, const std::vector<double> &p_list, const std::vector<std::string> &names) {
    if (p_list.empty()) {
        throw UsageError("--p-list must not be empty");
    }
    for (const double p : p_list) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw UsageError("noise probability " + cell(p) + " outside [0, 1]");
        }
    }
    std::vector<Pipeline> pipelines = parse_pipelines(names);
    for (auto &p : pipelines) {
        p = apply_batch_flag(p, o.batch);
    }
    ExperimentConfig cfg = to_config(o, 6);
    const Dataset data = load_normalized(o.data);
    const fs::path dir = make_output_dir(o, "noise-sweep");
    json prov = provenance("noise-sweep", o, cfg);
    prov["p_list"] = p_list;

    const auto rows = noise_sweep(data, p_list, pipelines, cfg);

    CsvWriter csv(dir / "noise_sweep.csv", prov);
    csv.row({"pipeline", "p", "balanced_accuracy_mean", "balanced_accuracy_stddev", "runs", "undefined"});
    json rows_json = json::array();
    for (const auto &r : rows) {
        const std::string name(to_string(r.pipeline));
        csv.row({name, cell(r.p), cell(r.balanced_accuracy.mean), cell(r.balanced_accuracy.stddev),
                 std::to_string(r.balanced_accuracy.defined), std::to_string(r.balanced_accuracy.undefined)});
        rows_json.push_back({{"pipeline", name},
                             {"p", r.p},
                             {"balanced_accuracy_mean", r.balanced_accuracy.mean},
                             {"balanced_accuracy_stddev", r.balanced_accuracy.stddev},
                             {"per_seed", r.per_seed}});
        std::cout << std::left << std::setw(14) << name << " p=" << std::setw(6) << r.p << std::fixed
                  << std::setprecision(3) << r.balanced_accuracy.mean << " +- " << r.balanced_accuracy.stddev
                  << std::defaultfloat << '\n';
    }
    json report = prov;
    report["rows"] = rows_json;
    write_json(dir / "noise_sweep.json", report);
    std::cout << "-> " << dir.string() << '\n';
    return 0;
}

void require_sizes(const std::vector<std::size_t> &sizes) {
    if (sizes.empty()) {
        throw UsageError("--sizes must not be empty");
    }
    for (const std::size_t n : sizes) {
        if (n < 2 || n % 2 != 0) {
            throw UsageError("--sizes entries must be even and at least 2, got " + std::to_string(n));
        }
    }
}

int cmd_benchmark(const CommonOptions &o, const std::vector<std::size_t> &sizes,
                  const std::vector<std::string> &names, int repetitions) {
    require_sizes(sizes);
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw UsageError("--sizes must be ascending");
    }
    std::vector<Pipeline> pipelines = parse_pipelines(names);
    for (auto &p : pipelines) {
        p = apply_batch_flag(p, o.batch);
    }
    CommonOptions local = o;
    local.n_train = sizes.front();
    ExperimentConfig cfg = to_config(local, 1);
    const Dataset data = load_normalized(o.data);
    const fs::path dir = make_output_dir(o, "benchmark");
    json prov = provenance("benchmark", o, cfg);
    prov["sizes"] = sizes;
    prov["repetitions"] = repetitions;

    std::vector<std::vector<BenchmarkRow>> results;
    for (const Pipeline p : pipelines) {
        results.push_back(wall_benchmark(p, data, cfg, sizes, repetitions));
    }

    CsvWriter csv(dir / "benchmark.csv", prov);
    csv.row({"pipeline", "n_train", "n_test", "train_seconds", "predict_seconds", "train_seconds_min",
             "predict_seconds_min", "train_ce", "predict_ce", "device_train_seconds", "device_predict_seconds"});
    json rows_json = json::array();
    for (const auto &series : results) {
        for (const auto &r : series) {
            const std::string name(to_string(r.pipeline));
            const DeviceEstimate dev = extrapolate_row(r, cfg.batch_size);
            csv.row({name, std::to_string(r.n_train), std::to_string(r.n_test), cell(r.train_seconds),
                     cell(r.predict_seconds), cell(r.train_seconds_min), cell(r.predict_seconds_min),
                     std::to_string(r.train_executions), std::to_string(r.predict_executions),
                     cell(dev.train.total), cell(dev.predict.total)});
            rows_json.push_back({{"pipeline", name},
                                 {"n_train", r.n_train},
                                 {"n_test", r.n_test},
                                 {"train_seconds", r.train_seconds},
                                 {"predict_seconds", r.predict_seconds},
                                 {"train_seconds_min", r.train_seconds_min},
                                 {"predict_seconds_min", r.predict_seconds_min},
                                 {"train_ce", r.train_executions},
                                 {"predict_ce", r.predict_executions},
                                 {"device_train_ce", dev.train.n_ce},
                                 {"device_train_seconds", dev.train.total},
                                 {"device_predict_seconds", dev.predict.total}});
            std::cout << std::left << std::setw(14) << name << " n=" << std::setw(6) << r.n_train
                      << " train " << r.train_seconds << " s, predict " << r.predict_seconds << " s\n";
        }
    }
    json report = prov;
    report["rows"] = rows_json;

    const std::vector<BenchmarkRow> *qsvm = nullptr;
    const std::vector<BenchmarkRow> *qcnn = nullptr;
    for (std::size_t i = 0; i < pipelines.size(); ++i) {
        if (pipelines[i] == Pipeline::Qsvm) {
            qsvm = &results[i];
        } else if (pipelines[i] == Pipeline::Qcnn || pipelines[i] == Pipeline::QcnnBatched) {
            qcnn = &results[i];
        }
    }
    if (qsvm && qcnn) {
        const auto cross = training_crossover(*qsvm, *qcnn);
        report["training_crossover_n"] = cross ? json(*cross) : json(nullptr);
        std::cout << "training crossover: " << (cross ? std::to_string(*cross) : "none in measured range") << '\n';
    }
    write_json(dir / "benchmark.json", report);
    std::cout << "-> " << dir.string() << '\n';
    return 0;
}

int cmd_size_sweep(const CommonOptions &o, const std::vector<std::size_t> &sizes,
                   const std::vector<std::string> &names) {
    require_sizes(sizes);
    std::vector<Pipeline> pipelines = parse_pipelines(names);
    for (auto &p : pipelines) {
        p = apply_batch_flag(p, o.batch);
    }
    CommonOptions local = o;
    local.n_train = sizes.front();
    ExperimentConfig cfg = to_config(local, 12);
    const Dataset data = load_normalized(o.data);
    const fs::path dir = make_output_dir(o, "size-sweep");
    json prov = provenance("size-sweep", o, cfg);
    prov["sizes"] = sizes;

    CsvWriter csv(dir / "size_sweep.csv", prov);
    std::vector<std::string> header = {"pipeline", "n_train"};
    for (const auto m : kMetricNames) {
        header.push_back(std::string(m) + "_mean");
        header.push_back(std::string(m) + "_se");
    }
    csv.row(header);
    json rows_json = json::array();
    for (const Pipeline p : pipelines) {
        for (const std::size_t n : sizes) {
            cfg.n_train = n;
            try {
                cfg.validate();
            } catch (const std::invalid_argument &e) {
                throw UsageError(e.what());
            }
            const ExperimentResult res = run_experiment(p, data, cfg);
            std::vector<std::string> row = {std::string(to_string(p)), std::to_string(n)};
            for (const auto &s : res.aggregate.metrics) {
                row.push_back(cell(s.mean));
                row.push_back(cell(s.standard_error));
            }
            csv.row(row);
            rows_json.push_back({{"pipeline", to_string(p)}, {"n_train", n}, {"aggregate", res.aggregate.to_json()}});
            std::cout << to_string(p) << " n=" << n << " accuracy " << res.aggregate["accuracy"].mean << '\n';
        }
    }
    json report = prov;
    report["rows"] = rows_json;
    write_json(dir / "size_sweep.json", report);
    std::cout << "-> " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum-kernel SVM and QCNN pulsar classification experiments"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string data_path;
    auto *validate = app.add_subcommand("validate-data", "check a HTRU-2 CSV and print its summary");
    validate->add_option("--data", data_path, "CSV to check")->required();

    std::string synth_out;
    std::size_t synth_neg = 16259;
    std::size_t synth_pos = 1639;
    std::uint64_t synth_seed = 0;
    auto *synth = app.add_subcommand("synth-data", "write a synthetic HTRU-2-shaped CSV");
    synth->add_option("--out", synth_out, "destination CSV")->required();
    synth->add_option("--negatives", synth_neg)->capture_default_str();
    synth->add_option("--positives", synth_pos)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    CommonOptions run_opts;
    std::string pipeline_name;
    bool export_sets = false;
    auto *run = app.add_subcommand("run", "train and evaluate one pipeline over several seeds");
    run->add_option("pipeline", pipeline_name, "qsvm | qcnn | qcnn-batched | csvm")->required();
    add_common(*run, run_opts, true);
    run->add_option("--batch", run_opts.batch, "QCNN batching")->check(CLI::IsMember({"full", "balanced10"}));
    run->add_option("--noise-p", run_opts.noise_p, "bit-flip probability per touched qubit per gate")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--kernel-cache", run_opts.kernel_cache, "directory for QSVM kernel matrices");
    run->add_flag("--export-sets", export_sets, "write each seed's train/test draws with a JSON sidecar");

    CommonOptions sweep_opts;
    sweep_opts.n_train = 50;
    sweep_opts.n_test = 100;
    sweep_opts.trajectories = 256;
    sweep_opts.train_trajectories = 16;
    sweep_opts.batch = "balanced10";
    std::vector<double> p_list = {0.0, 0.01, 0.1, 0.5};
    std::vector<std::string> sweep_pipelines = {"qsvm", "qcnn"};
    auto *sweep = app.add_subcommand("noise-sweep", "balanced accuracy under bit-flip noise");
    add_common(*sweep, sweep_opts, true);
    sweep->add_option("--p-list", p_list, "comma-separated flip probabilities")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--pipelines", sweep_pipelines)->delimiter(',')->capture_default_str();
    sweep->add_option("--batch", sweep_opts.batch, "QCNN batching")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "balanced10"}));

    CommonOptions bench_opts;
    std::vector<std::size_t> bench_sizes = {25, 50, 100, 200};
    std::vector<std::string> bench_pipelines = {"qsvm", "qcnn"};
    int repetitions = 3;
    auto *bench = app.add_subcommand("benchmark", "wall-clock scaling with device-time extrapolation");
    add_common(*bench, bench_opts, false);
    bench->add_option("--sizes", bench_sizes, "ascending training sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--pipelines", bench_pipelines)->delimiter(',')->capture_default_str();
    bench->add_option("--repetitions", repetitions)->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--batch", bench_opts.batch, "QCNN batching")->check(CLI::IsMember({"full", "balanced10"}));

    CommonOptions size_opts;
    std::vector<std::size_t> sweep_sizes = {10, 20, 50, 100, 200};
    std::vector<std::string> size_pipelines = {"qsvm", "qcnn"};
    auto *sizes = app.add_subcommand("size-sweep", "metrics against training-set size");
    add_common(*sizes, size_opts, false);
    sizes->add_option("--sizes", sweep_sizes, "training sizes")->delimiter(',')->capture_default_str();
    sizes->add_option("--pipelines", size_pipelines)->delimiter(',')->capture_default_str();
    sizes->add_option("--batch", size_opts.batch, "QCNN batching")->check(CLI::IsMember({"full", "balanced10"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*validate) {
            return cmd_validate_data(data_path);
        }
        if (*synth) {
            return cmd_synth_data(synth_out, synth_neg, synth_pos, synth_seed);
        }
        if (*run) {
            return cmd_run(pipeline_name, run_opts, export_sets);
        }
        if (*sweep) {
            return cmd_noise_sweep(sweep_opts, p_list, sweep_pipelines);
        }
        if (*bench) {
            return cmd_benchmark(bench_opts, bench_sizes, bench_pipelines, repetitions);
        }
        if (*sizes) {
            return cmd_size_sweep(size_opts, sweep_sizes, size_pipelines);
        }
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

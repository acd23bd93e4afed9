#include "qpulsar/qcnn.hpp"

#include "qpulsar/errors.hpp"
#include "random_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpulsar {

namespace {

constexpr double kShift = std::numbers::pi / 2.0;

void apply(StateVector &state, const Gate &gate) {
    switch (gate.kind) {
        case GateKind::RY:
            state.ry(gate.target, gate.angle);
            break;
        case GateKind::CNOT:
            state.cnot(gate.control, gate.target);
            break;
        case GateKind::PauliX:
            state.x(gate.target);
            break;
    }
}

double readout_of(const QcnnCircuit &qc, const std::optional<NoiseConfig> &noise) {
    if (noise) {
        return run_noisy(qc.circuit, *noise, Readout::qubit_one(qc.readout_qubit)).mean;
    }
    return prob_qubit_one(run(qc.circuit), qc.readout_qubit);
}

}  // namespace

QcnnModel init_model(const QcnnArchitecture &arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 rng(seed);
    QcnnModel model{arch, std::vector<double>(static_cast<std::size_t>(arch.param_count()))};
    for (double &t : model.theta) {
        t = -std::numbers::pi + 2.0 * std::numbers::pi * detail::uniform_unit(rng);
    }
    return model;
}

double forward(const QcnnModel &model, std::span<const double> x, const std::optional<NoiseConfig> &noise) {
    return readout_of(build_qcnn_tracked(model.arch, model.theta, x), noise);
}

double bce_loss(double y_pred, int y, double eps) {
    const double p = std::clamp(y_pred, eps, 1.0 - eps);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double bce_loss_derivative(double y_pred, int y, double eps) {
    if (y_pred < eps || y_pred > 1.0 - eps) {
        return 0.0;
    }
    return y == 1 ? -1.0 / y_pred : 1.0 / (1.0 - y_pred);
}

namespace {

struct ShiftPass {
    double value = 0.0;
    std::vector<double> grad;
    std::uint64_t evaluations = 0;
};

// One circuit and every shifted copy of it, run under the same flip schedule. The state
// before each parameterized gate is cached so a shifted copy only replays its suffix.
void accumulate_pass(const QcnnCircuit &qc, const std::vector<std::uint32_t> *flips,
                     const TrajectorySampler *sampler, double weight, ShiftPass &out) {
    const auto gates = qc.circuit.gates();
    const auto flip = [&](StateVector &state, std::size_t g) {
        if (flips != nullptr) {
            apply_flips(state, (*flips)[g]);
        }
    };
    const auto read = [&](const StateVector &state) {
        return sampler != nullptr ? sampler->readout(state) : prob_qubit_one(state, qc.readout_qubit);
    };

    std::vector<std::optional<StateVector>> before(gates.size());
    StateVector state(qc.circuit.n_qubits());
    for (std::size_t g = 0; g < gates.size(); ++g) {
        if (qc.param_slot[g] >= 0) {
            before[g] = state;
        }
        apply(state, gates[g]);
        flip(state, g);
    }
    out.value += weight * read(state);

    for (std::size_t g = 0; g < gates.size(); ++g) {
        const int slot = qc.param_slot[g];
        if (slot < 0) {
            continue;
        }
        double halves[2] = {0.0, 0.0};
        for (int s = 0; s < 2; ++s) {
            StateVector shifted = *before[g];
            shifted.ry(gates[g].target, gates[g].angle + (s == 0 ? kShift : -kShift));
            flip(shifted, g);
            for (std::size_t h = g + 1; h < gates.size(); ++h) {
                apply(shifted, gates[h]);
                flip(shifted, h);
            }
            halves[s] = read(shifted);
        }
        out.grad[static_cast<std::size_t>(slot)] += weight * 0.5 * (halves[0] - halves[1]);
        out.evaluations += 2;
    }
}

ShiftPass shift_pass(const QcnnModel &model, std::span<const double> x, const std::optional<NoiseConfig> &noise) {
    const QcnnCircuit qc = build_qcnn_tracked(model.arch, model.theta, x);
    ShiftPass out;
    out.grad.assign(model.theta.size(), 0.0);
    if (!noise || noise->p_flip == 0.0) {
        accumulate_pass(qc, nullptr, nullptr, 1.0, out);
        return out;
    }
    TrajectorySampler sampler(qc.circuit, *noise, Readout::qubit_one(qc.readout_qubit));
    std::vector<std::uint32_t> flips;
    const double weight = 1.0 / noise->trajectories;
    std::uint64_t evaluations = 0;
    for (int t = 0; t < noise->trajectories; ++t) {
        sampler.draw(flips);
        out.evaluations = 0;
        accumulate_pass(qc, &flips, &sampler, weight, out);
        evaluations = out.evaluations;
    }
    // Counted per circuit, not per trajectory.
    out.evaluations = evaluations;
    return out;
}

}  // namespace

std::vector<double> forward_gradient(const QcnnModel &model, std::span<const double> x,
                                     const std::optional<NoiseConfig> &noise, std::uint64_t *shift_evaluations) {
    ShiftPass pass = shift_pass(model, x, noise);
    if (shift_evaluations != nullptr) {
        *shift_evaluations += pass.evaluations;
    }
    return std::move(pass.grad);
}

GradientResult gradient(const QcnnModel &model, std::span<const double> x, int y, double eps,
                        const std::optional<NoiseConfig> &noise) {
    ShiftPass pass = shift_pass(model, x, noise);
    GradientResult out;
    out.y_pred = pass.value;
    out.loss = bce_loss(out.y_pred, y, eps);
    const double dl_dp = bce_loss_derivative(out.y_pred, y, eps);
    out.d_theta = std::move(pass.grad);
    out.shift_evaluations = pass.evaluations;
    for (double &d : out.d_theta) {
        d *= dl_dp;
    }
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) {
        throw std::invalid_argument("learning rate must be non-negative");
    }
    if (epochs < 1) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (batch == BatchMode::Balanced && (batch_size == 0 || batch_size % 2 != 0)) {
        throw std::invalid_argument("balanced batch size must be even and positive");
    }
    if (!(loss_clamp > 0.0 && loss_clamp < 0.5)) {
        throw std::invalid_argument("loss clamp must lie in (0, 0.5)");
    }
    if (noise) {
        noise->validate();
    }
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j = {
        {"learning_rate", learning_rate},
        {"epochs", epochs},
        {"batch", batch == BatchMode::Full ? "full" : "balanced"},
        {"batch_size", batch_size},
        {"seed", seed},
        {"loss_clamp", loss_clamp},
        {"optimizer", optimizer == Optimizer::GradientDescent ? "gd" : "adam"},
    };
    if (noise) {
        j["noise"] = {{"p_flip", noise->p_flip}, {"trajectories", noise->trajectories}, {"seed", noise->seed}};
    } else {
        j["noise"] = nullptr;
    }
    return j;
}

TrainResult train(QcnnModel model, const Dataset &train_set, const TrainConfig &config) {
    config.validate();
    if (train_set.empty()) {
        throw InsufficientData("empty training set");
    }
    if (model.theta.size() != static_cast<std::size_t>(model.arch.param_count())) {
        throw std::invalid_argument("model parameter count does not match its architecture");
    }

    std::vector<Batch> batches;
    if (config.batch == BatchMode::Balanced) {
        batches = make_batches(train_set, config.batch_size, static_cast<std::size_t>(config.epochs),
                               mix_seed(config.seed, 1));
    }
    Batch everything(train_set.size());
    for (std::size_t i = 0; i < everything.size(); ++i) {
        everything[i] = i;
    }

    TrainResult result;
    result.history.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
    const std::size_t n_params = model.theta.size();
    std::vector<double> m(n_params, 0.0);
    std::vector<double> v(n_params, 0.0);
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double adam_eps = 1e-8;

    std::uint64_t stream = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Batch &members = config.batch == BatchMode::Full ? everything : batches[static_cast<std::size_t>(epoch)];
        std::vector<double> grad(n_params, 0.0);
        double loss_sum = 0.0;
        for (const std::size_t idx : members) {
            const Sample &s = train_set.samples[idx];
            std::optional<NoiseConfig> noise = config.noise;
            if (noise) {
                noise->seed = mix_seed(config.noise->seed, stream);
            }
            ++stream;
            const GradientResult g = gradient(model, s.features, s.label, config.loss_clamp, noise);
            loss_sum += g.loss;
            for (std::size_t k = 0; k < n_params; ++k) {
                grad[k] += g.d_theta[k];
            }
            result.shift_executions += g.shift_evaluations;
        }
        const double count = static_cast<double>(members.size());
        result.base_executions += members.size();
        result.history.epoch_loss.push_back(loss_sum / count);

        for (std::size_t k = 0; k < n_params; ++k) {
            const double gk = grad[k] / count;
            if (config.optimizer == Optimizer::GradientDescent) {
                model.theta[k] -= config.learning_rate * gk;
            } else {
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                const double m_hat = m[k] / (1.0 - std::pow(beta1, epoch + 1));
                const double v_hat = v[k] / (1.0 - std::pow(beta2, epoch + 1));
                model.theta[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + adam_eps);
            }
        }
    }
    result.model = std::move(model);
    return result;
}

int predict(const QcnnModel &model, std::span<const double> x, double threshold,
            const std::optional<NoiseConfig> &noise) {
    return forward(model, x, noise) >= threshold ? 1 : 0;
}

nlohmann::json to_json(const QcnnArchitecture &arch) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto &layer : arch.layers) {
        if (const auto *conv = std::get_if<ConvLayer>(&layer)) {
            layers.push_back({{"type", "conv"}, {"stride", conv->stride}});
        } else {
            const auto policy = std::get<PoolLayer>(layer).policy;
            layers.push_back(
                {{"type", "pool"}, {"policy", policy == PoolPolicy::DiscardOdd ? "discard_odd" : "discard_even"}});
        }
    }
    return {{"n_qubits", arch.n_qubits}, {"layers", layers}, {"final_qubit", arch.final_qubit()}};
}

nlohmann::json to_json(const TrainResult &result, const TrainConfig &config) {
    return {
        {"theta", result.model.theta},
        {"loss_history", result.history.epoch_loss},
        {"architecture", to_json(result.model.arch)},
        {"config", config.to_json()},
        {"base_executions", result.base_executions},
        {"shift_executions", result.shift_executions},
    };
}

}  // namespace qpulsar

#include "qpulsar/statevector.hpp"

#include "qpulsar/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace qpulsar {

namespace {

void check_register_size(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                                    std::to_string(n_qubits));
    }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_register_size(n_qubits);
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

StateVector StateVector::from_amplitudes(int n_qubits, std::vector<Complex> amplitudes) {
    check_register_size(n_qubits);
    if (amplitudes.size() != (std::size_t{1} << n_qubits)) {
        throw std::invalid_argument("amplitude vector length must be 2^n_qubits");
    }
    return StateVector(n_qubits, std::move(amplitudes));
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    StateVector state(n_qubits);
    if (index >= state.dim()) {
        throw std::out_of_range("basis index out of range");
    }
    state.amplitudes_[0] = 0.0;
    state.amplitudes_[index] = 1.0;
    return state;
}

double StateVector::norm() const {
    double sum = 0.0;
    for (const auto &a : amplitudes_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

void StateVector::ry(int qubit, double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    const std::size_t bit = std::size_t{1} << qubit;
    const std::size_t n = amplitudes_.size();
    // Visit each (i0, i1 = i0 | bit) pair once.
    for (std::size_t base = 0; base < n; base += 2 * bit) {
        for (std::size_t i0 = base; i0 < base + bit; ++i0) {
            const Complex a0 = amplitudes_[i0];
            const Complex a1 = amplitudes_[i0 + bit];
            amplitudes_[i0] = c * a0 - s * a1;
            amplitudes_[i0 + bit] = s * a0 + c * a1;
        }
    }
}

void StateVector::cnot(int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const int lo = std::min(control, target);
    const int hi = std::max(control, target);
    const std::size_t quarter = amplitudes_.size() >> 2;
    // k enumerates indices with both bits clear; swap the (c=1,t=0) and (c=1,t=1) entries.
    for (std::size_t k = 0; k < quarter; ++k) {
        std::size_t i = ((k >> lo) << (lo + 1)) | (k & ((std::size_t{1} << lo) - 1));
        i = ((i >> hi) << (hi + 1)) | (i & ((std::size_t{1} << hi) - 1));
        std::swap(amplitudes_[i | cbit], amplitudes_[i | cbit | tbit]);
    }
}

void StateVector::x(int qubit) {
    const std::size_t bit = std::size_t{1} << qubit;
    const std::size_t n = amplitudes_.size();
    for (std::size_t base = 0; base < n; base += 2 * bit) {
        for (std::size_t i0 = base; i0 < base + bit; ++i0) {
            std::swap(amplitudes_[i0], amplitudes_[i0 + bit]);
        }
    }
}

void validate_gate(const Gate &gate, int n_qubits) {
    const auto in_range = [n_qubits](int q) { return q >= 0 && q < n_qubits; };
    if (!in_range(gate.target)) {
        throw InvalidGate("gate target " + std::to_string(gate.target) + " outside register of " +
                          std::to_string(n_qubits) + " qubits");
    }
    if (gate.kind == GateKind::CNOT) {
        if (!in_range(gate.control)) {
            throw InvalidGate("CNOT control " + std::to_string(gate.control) + " outside register of " +
                              std::to_string(n_qubits) + " qubits");
        }
        if (gate.control == gate.target) {
            throw InvalidGate("CNOT control equals target");
        }
    }
}

std::string to_string(const Gate &gate) {
    switch (gate.kind) {
        case GateKind::RY:
            return "RY(" + std::to_string(gate.target) + ", " + std::to_string(gate.angle) + ")";
        case GateKind::CNOT:
            return "CNOT(" + std::to_string(gate.control) + ", " + std::to_string(gate.target) + ")";
        case GateKind::PauliX:
            return "X(" + std::to_string(gate.target) + ")";
    }
    return "?";
}

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) { check_register_size(n_qubits); }

Circuit &Circuit::add(const Gate &gate) {
    validate_gate(gate, n_qubits_);
    gates_.push_back(gate);
    return *this;
}

Circuit &Circuit::append(const Circuit &other) {
    if (other.n_qubits_ != n_qubits_) {
        throw std::invalid_argument("cannot append circuits of different register size");
    }
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
    return *this;
}

void Circuit::set_angle(std::size_t index, double angle) {
    Gate &gate = gates_.at(index);
    if (gate.kind != GateKind::RY) {
        throw std::invalid_argument("set_angle on a non-rotation gate");
    }
    gate.angle = angle;
}

int circuit_depth(const Circuit &circuit) {
    std::vector<int> level(static_cast<std::size_t>(circuit.n_qubits()), 0);
    int depth = 0;
    for (const Gate &gate : circuit.gates()) {
        int layer = 0;
        for (int k = 0; k < gate.arity(); ++k) {
            layer = std::max(layer, level[static_cast<std::size_t>(gate.qubit(k))]);
        }
        ++layer;
        for (int k = 0; k < gate.arity(); ++k) {
            level[static_cast<std::size_t>(gate.qubit(k))] = layer;
        }
        depth = std::max(depth, layer);
    }
    return depth;
}

std::size_t gate_count(const Circuit &circuit) { return circuit.size(); }

namespace {

void apply_unchecked(StateVector &state, const Gate &gate) {
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

}  // namespace

StateVector apply_gate(StateVector state, const Gate &gate) {
    validate_gate(gate, state.n_qubits());
    apply_unchecked(state, gate);
    return state;
}

StateVector run(const Circuit &circuit) {
    StateVector state(circuit.n_qubits());
    for (const Gate &gate : circuit.gates()) {
        apply_unchecked(state, gate);
    }
    return state;
}

double prob_all_zero(const StateVector &state) { return std::norm(state[0]); }

double prob_qubit_one(const StateVector &state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits()) {
        throw std::out_of_range("readout qubit " + std::to_string(qubit) + " outside register");
    }
    const std::size_t bit = std::size_t{1} << qubit;
    double p = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        if ((i & bit) != 0) {
            p += std::norm(state[i]);
        }
    }
    return p;
}

double measure(const StateVector &state, const Readout &readout) {
    return readout.kind == Readout::Kind::AllZero ? prob_all_zero(state) : prob_qubit_one(state, readout.qubit);
}

void NoiseConfig::validate() const {
    if (!(p_flip >= 0.0 && p_flip <= 1.0)) {
        throw std::invalid_argument("p_flip must lie in [0, 1]");
    }
    if (trajectories < 1) {
        throw std::invalid_argument("trajectories must be >= 1");
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrajectorySampler::TrajectorySampler(const Circuit &circuit, const NoiseConfig &noise, const Readout &readout)
    : gates_(circuit.gates().begin(), circuit.gates().end()),
      readout_(readout),
      p_(noise.p_flip),
      always_(noise.p_flip >= 1.0),
      threshold_(always_ ? std::numeric_limits<std::uint64_t>::max()
                         : static_cast<std::uint64_t>(std::ldexp(noise.p_flip, 64))),
      rng_(noise.seed) {
    noise.validate();
    const int n = circuit.n_qubits();
    if (readout.kind == Readout::Kind::QubitOne && (readout.qubit < 0 || readout.qubit >= n)) {
        throw std::out_of_range("readout qubit outside register");
    }

    // Flips after the last gate on a qubit are folded into the readout.
    std::vector<std::ptrdiff_t> last(static_cast<std::size_t>(n), -1);
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        for (int k = 0; k < gates_[g].arity(); ++k) {
            last[static_cast<std::size_t>(gates_[g].qubit(k))] = static_cast<std::ptrdiff_t>(g);
        }
    }
    sampled_.assign(gates_.size(), 0);
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        for (int k = 0; k < gates_[g].arity(); ++k) {
            const int q = gates_[g].qubit(k);
            if (last[static_cast<std::size_t>(q)] != static_cast<std::ptrdiff_t>(g)) {
                sampled_[g] |= std::uint32_t{1} << q;
            }
        }
    }
    std::size_t folded_mask = 0;
    for (int q = 0; q < n; ++q) {
        if (last[static_cast<std::size_t>(q)] >= 0) {
            folded_mask |= std::size_t{1} << q;
        }
    }

    if (readout.kind == Readout::Kind::AllZero) {
        const std::size_t dim = std::size_t{1} << n;
        weight_.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & ~folded_mask) != 0) {
                continue;
            }
            double w = 1.0;
            for (int q = 0; q < n; ++q) {
                const std::size_t bit = std::size_t{1} << q;
                if ((folded_mask & bit) != 0) {
                    w *= (i & bit) != 0 ? p_ : 1.0 - p_;
                }
            }
            weight_[i] = w;
        }
    } else {
        readout_folded_ = ((folded_mask >> readout.qubit) & 1U) != 0;
    }
}

void TrajectorySampler::draw(std::vector<std::uint32_t> &flips) {
    flips.assign(gates_.size(), 0);
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        // Draw order: gates in sequence, touched qubits control first.
        for (int k = 0; k < gates_[g].arity(); ++k) {
            const std::uint32_t bit = std::uint32_t{1} << gates_[g].qubit(k);
            if ((sampled_[g] & bit) != 0 && (always_ || rng_() < threshold_)) {
                flips[g] |= bit;
            }
        }
    }
}

double TrajectorySampler::readout(const StateVector &state) const {
    if (readout_.kind == Readout::Kind::AllZero) {
        // Divided by the computed norm: rounding drift in the norm depends on the input angles
        // and would otherwise leak through a readout that is flat in theory (p = 1/2).
        const auto amps = state.amplitudes();
        double value = 0.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            const double prob = std::norm(amps[i]);
            norm += prob;
            value += weight_[i] * prob;
        }
        return value / norm;
    }
    const double p1 = prob_qubit_one(state, readout_.qubit);
    return readout_folded_ ? (1.0 - p_) * p1 + p_ * (1.0 - p1) : p1;
}

void apply_flips(StateVector &state, std::uint32_t mask) {
    while (mask != 0) {
        const int q = std::countr_zero(mask);
        state.x(q);
        mask &= mask - 1;
    }
}

NoisyEstimate run_noisy(const Circuit &circuit, const NoiseConfig &noise, const Readout &readout) {
    noise.validate();
    if (readout.kind == Readout::Kind::QubitOne && (readout.qubit < 0 || readout.qubit >= circuit.n_qubits())) {
        throw std::out_of_range("readout qubit outside register");
    }
    if (noise.p_flip == 0.0) {
        return {measure(run(circuit), readout), 0.0, noise.trajectories};
    }

    TrajectorySampler sampler(circuit, noise, readout);
    const auto gates = circuit.gates();
    const StateVector initial(circuit.n_qubits());
    StateVector state = initial;
    std::vector<std::uint32_t> flips;
    // Welford running mean and squared deviations.
    double mean = 0.0;
    double m2 = 0.0;
    for (int t = 0; t < noise.trajectories; ++t) {
        sampler.draw(flips);
        state = initial;
        for (std::size_t g = 0; g < gates.size(); ++g) {
            apply_unchecked(state, gates[g]);
            apply_flips(state, flips[g]);
        }
        const double value = sampler.readout(state);
        const double delta = value - mean;
        mean += delta / (t + 1);
        m2 += delta * (value - mean);
    }

    const double count = noise.trajectories;
    const double se = noise.trajectories > 1 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0;
    return {mean, se, noise.trajectories};
}

}  // namespace qpulsar

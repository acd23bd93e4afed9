#include "qpulsar/circuits.hpp"

#include <sstream>
#include <stdexcept>

namespace qpulsar {

Circuit qsvm_circuit(std::span<const double> x, std::span<const double> x_prime) {
    if (x.size() != x_prime.size()) {
        throw std::invalid_argument("feature vectors differ in length (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(x_prime.size()) + ")");
    }
    if (x.empty()) {
        throw std::invalid_argument("empty feature vector");
    }
    const int n = static_cast<int>(x.size());
    Circuit circuit(n);
    for (int i = 0; i < n; ++i) {
        circuit.ry(i, x[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i) {
        circuit.ry(i, -x_prime[static_cast<std::size_t>(i)]);
    }
    return circuit;
}

QcnnArchitecture QcnnArchitecture::pulsar_default() { return halving(8, 5, 1); }

QcnnArchitecture QcnnArchitecture::halving(int n_qubits, int first_stride, int deep_stride, PoolPolicy policy) {
    if (n_qubits < 2 || (n_qubits & (n_qubits - 1)) != 0) {
        throw std::invalid_argument("halving architecture needs a power-of-two register of at least 2 qubits");
    }
    QcnnArchitecture arch;
    arch.n_qubits = n_qubits;
    for (int m = n_qubits, k = 0; m > 1; m /= 2, ++k) {
        arch.layers.emplace_back(ConvLayer{k == 0 ? first_stride : deep_stride});
        arch.layers.emplace_back(PoolLayer{policy});
    }
    return arch;
}

int QcnnArchitecture::conv_layer_count() const {
    int count = 0;
    for (const auto &layer : layers) {
        count += std::holds_alternative<ConvLayer>(layer) ? 1 : 0;
    }
    return count;
}

std::vector<std::pair<int, int>> conv_pairs(std::span<const int> active, int stride) {
    const auto m = static_cast<int>(active.size());
    if (m < 2) {
        throw std::invalid_argument("convolution needs at least 2 active qubits");
    }
    if (stride < 1) {
        throw std::invalid_argument("stride must be >= 1");
    }
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(active.size());
    for (int j = 0; j < m; ++j) {
        const int a = active[static_cast<std::size_t>(j)];
        const int b = active[static_cast<std::size_t>((j + stride) % m)];
        if (a != b) {
            pairs.emplace_back(a, b);
        }
    }
    if (pairs.empty()) {
        throw std::invalid_argument("stride " + std::to_string(stride) + " is a multiple of the active count " +
                                    std::to_string(m) + "; every pair is degenerate");
    }
    return pairs;
}

std::vector<std::pair<int, int>> pool_pairs(std::span<const int> active, PoolPolicy policy) {
    if (active.size() < 2 || active.size() % 2 != 0) {
        throw std::invalid_argument("pooling needs an even number (>= 2) of active qubits, got " +
                                    std::to_string(active.size()));
    }
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t j = 0; j + 1 < active.size(); j += 2) {
        const int even = active[j];
        const int odd = active[j + 1];
        if (policy == PoolPolicy::DiscardOdd) {
            pairs.emplace_back(odd, even);
        } else {
            pairs.emplace_back(even, odd);
        }
    }
    return pairs;
}

std::vector<std::vector<int>> QcnnArchitecture::active_sets() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("architecture register size out of range");
    }
    std::vector<std::vector<int>> sets;
    std::vector<int> active(static_cast<std::size_t>(n_qubits));
    for (int q = 0; q < n_qubits; ++q) {
        active[static_cast<std::size_t>(q)] = q;
    }
    sets.push_back(active);
    for (const auto &layer : layers) {
        if (const auto *conv = std::get_if<ConvLayer>(&layer)) {
            (void)conv_pairs(active, conv->stride);  // validates
        } else {
            const auto &pool = std::get<PoolLayer>(layer);
            std::vector<int> kept;
            for (const auto &[discarded, retained] : pool_pairs(active, pool.policy)) {
                (void)discarded;
                kept.push_back(retained);
            }
            active = std::move(kept);
        }
        sets.push_back(active);
    }
    return sets;
}

void QcnnArchitecture::validate() const {
    const auto sets = active_sets();
    if (sets.back().size() != 1) {
        throw std::invalid_argument("architecture leaves " + std::to_string(sets.back().size()) +
                                    " active qubits; expected exactly 1");
    }
}

int QcnnArchitecture::final_qubit() const {
    const auto sets = active_sets();
    if (sets.back().size() != 1) {
        throw std::invalid_argument("architecture does not reduce to a single qubit");
    }
    return sets.back().front();
}

QcnnCircuit build_qcnn_tracked(const QcnnArchitecture &arch, std::span<const double> theta,
                               std::span<const double> x) {
    arch.validate();
    if (theta.size() != static_cast<std::size_t>(arch.param_count())) {
        throw std::invalid_argument("parameter vector has length " + std::to_string(theta.size()) + ", expected " +
                                    std::to_string(arch.param_count()));
    }
    if (x.size() != static_cast<std::size_t>(arch.n_qubits)) {
        throw std::invalid_argument("feature vector has length " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(arch.n_qubits));
    }

    QcnnCircuit out{Circuit(arch.n_qubits), {}, 0};
    const auto emit = [&out](const Gate &gate, int slot) {
        out.circuit.add(gate);
        out.param_slot.push_back(slot);
    };

    for (int q = 0; q < arch.n_qubits; ++q) {
        emit(Gate::ry(q, x[static_cast<std::size_t>(q)]), -1);
    }

    std::vector<int> active(static_cast<std::size_t>(arch.n_qubits));
    for (int q = 0; q < arch.n_qubits; ++q) {
        active[static_cast<std::size_t>(q)] = q;
    }
    int conv_index = 0;
    for (const auto &layer : arch.layers) {
        if (const auto *conv = std::get_if<ConvLayer>(&layer)) {
            const int slot_a = 2 * conv_index;
            const int slot_b = slot_a + 1;
            for (const auto &[a, b] : conv_pairs(active, conv->stride)) {
                emit(Gate::ry(a, theta[static_cast<std::size_t>(slot_a)]), slot_a);
                emit(Gate::ry(b, theta[static_cast<std::size_t>(slot_b)]), slot_b);
                emit(Gate::cnot(a, b), -1);
            }
            ++conv_index;
        } else {
            std::vector<int> kept;
            for (const auto &[discarded, retained] : pool_pairs(active, std::get<PoolLayer>(layer).policy)) {
                emit(Gate::cnot(discarded, retained), -1);
                kept.push_back(retained);
            }
            active = std::move(kept);
        }
    }
    out.readout_qubit = active.front();
    return out;
}

Circuit build_qcnn(const QcnnArchitecture &arch, std::span<const double> theta, std::span<const double> x) {
    return build_qcnn_tracked(arch, theta, x).circuit;
}

Digraph to_digraph(const QcnnArchitecture &arch) {
    const auto sets = arch.active_sets();
    Digraph graph;
    graph.n_nodes = arch.n_qubits;
    int conv_layer = 0;
    int pool_layer = 0;
    for (std::size_t k = 0; k < arch.layers.size(); ++k) {
        const auto &active = sets[k];
        if (const auto *conv = std::get_if<ConvLayer>(&arch.layers[k])) {
            ++conv_layer;
            for (const auto &[a, b] : conv_pairs(active, conv->stride)) {
                graph.edges.push_back({a, b, EdgeKind::Conv, conv_layer});
            }
        } else {
            ++pool_layer;
            for (const auto &[discarded, retained] : pool_pairs(active, std::get<PoolLayer>(arch.layers[k]).policy)) {
                graph.edges.push_back({discarded, retained, EdgeKind::Pool, pool_layer});
            }
        }
    }
    return graph;
}

std::string to_edge_list(const Digraph &graph) {
    std::ostringstream out;
    for (const auto &e : graph.edges) {
        out << e.from << ' ' << e.to << ' ' << (e.kind == EdgeKind::Conv ? "conv" : "pool") << ' ' << e.layer << '\n';
    }
    return out.str();
}

}  // namespace qpulsar

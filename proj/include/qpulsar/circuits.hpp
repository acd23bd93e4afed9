// Circuit builders for the two classifiers: the angle-embedding fidelity kernel circuit
// and the layered convolution/pooling circuit, plus its directed-graph view.

#pragma once

#include "qpulsar/statevector.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qpulsar {

/// Per-qubit rotation angles, radians in [0, pi] after normalization.
using FeatureVector = std::vector<double>;

/// RY(x_i) on qubit i, followed by RY(-x'_i) on qubit i: the adjoint embedding of x'
/// applied after the embedding of x. Throws std::invalid_argument on length mismatch.
Circuit qsvm_circuit(std::span<const double> x, std::span<const double> x_prime);

// Which qubit of an adjacent active pair is the CNOT control and gets discarded.
enum class PoolPolicy : std::uint8_t {
    DiscardOdd,   // (a0 -> a1 control), keep a0
    DiscardEven,  // keep a1
};

struct ConvLayer {
    int stride = 1;
};

struct PoolLayer {
    PoolPolicy policy = PoolPolicy::DiscardOdd;
};

using QcnnLayer = std::variant<ConvLayer, PoolLayer>;

struct QcnnArchitecture {
    int n_qubits = 8;
    std::vector<QcnnLayer> layers;

    /// Eight qubits, Conv(5) Pool Conv(1) Pool Conv(1) Pool.
    static QcnnArchitecture pulsar_default();

    /// Conv(stride) + Pool repeated until one qubit remains; first stride as given, deeper
    /// layers use `deep_stride`. n_qubits must be a power of two.
    static QcnnArchitecture halving(int n_qubits, int first_stride, int deep_stride = 1,
                                    PoolPolicy policy = PoolPolicy::DiscardOdd);

    int conv_layer_count() const;
    int param_count() const { return 2 * conv_layer_count(); }

    /// Active qubits before each layer, plus the final set (layers.size() + 1 entries).
    /// Throws std::invalid_argument if the layout is not valid.
    std::vector<std::vector<int>> active_sets() const;

    /// The single active qubit after the last layer.
    int final_qubit() const;

    /// Throws std::invalid_argument unless the layout reduces the register to exactly one qubit.
    void validate() const;
};

/// Ring pairing (a_j, a_{(j+stride) mod m}) for j = 0..m-1. Throws std::invalid_argument
/// if fewer than two qubits are active or the stride is a multiple of m (all pairs degenerate).
std::vector<std::pair<int, int>> conv_pairs(std::span<const int> active, int stride);

/// (discarded, retained) pairs for a pooling layer over `active`.
std::vector<std::pair<int, int>> pool_pairs(std::span<const int> active, PoolPolicy policy);

/// Circuit plus, for each gate, the index of the shared parameter it carries (-1 if none).
struct QcnnCircuit {
    Circuit circuit;
    std::vector<int> param_slot;
    int readout_qubit = 0;
};

QcnnCircuit build_qcnn_tracked(const QcnnArchitecture &arch, std::span<const double> theta,
                               std::span<const double> x);

/// Embedding RY(x_i), then per conv layer k: RY(theta_2k) on a, RY(theta_2k+1) on b, CNOT(a, b)
/// for every ring pair; per pool layer: CNOT(discarded -> retained).
Circuit build_qcnn(const QcnnArchitecture &arch, std::span<const double> theta, std::span<const double> x);

enum class EdgeKind : std::uint8_t { Conv, Pool };

struct DigraphEdge {
    int from;
    int to;
    EdgeKind kind;
    int layer;  // 1-based index among layers of the same kind

    bool operator==(const DigraphEdge &) const = default;
};

struct Digraph {
    int n_nodes = 0;
    std::vector<DigraphEdge> edges;
};

/// Conv edges point a -> b of each pair; pool edges point at the retained qubit.
Digraph to_digraph(const QcnnArchitecture &arch);

/// One "from to tag layer" line per edge, tag in {conv, pool}.
std::string to_edge_list(const Digraph &graph);

}  // namespace qpulsar

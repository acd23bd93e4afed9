// Dense statevector simulation of small RY/CNOT/X circuits, with an optional
// per-gate bit-flip channel sampled by Monte-Carlo trajectories.
//
// Basis ordering is little-endian: bit i of a basis index is the state of qubit i.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qpulsar {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 12;

class StateVector {
  public:
    /// |00...0> on `n_qubits` qubits.
    explicit StateVector(int n_qubits);

    /// Takes ownership of `amplitudes`; length must be 2^n_qubits. Not renormalized.
    static StateVector from_amplitudes(int n_qubits, std::vector<Complex> amplitudes);

    /// Computational basis state |index>.
    static StateVector basis(int n_qubits, std::size_t index);

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    const Complex &operator[](std::size_t index) const { return amplitudes_[index]; }

    double norm() const;

    // In-place primitives. Qubit indices are not checked here; apply_gate() validates.
    void ry(int qubit, double angle);
    void cnot(int control, int target);
    void x(int qubit);

  private:
    StateVector(int n_qubits, std::vector<Complex> amplitudes);

    int n_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class GateKind : std::uint8_t { RY, CNOT, PauliX };

struct Gate {
    GateKind kind;
    int target;
    int control = -1;   // CNOT only
    double angle = 0.0; // RY only, radians

    static Gate ry(int target, double angle) { return {GateKind::RY, target, -1, angle}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, 0.0}; }
    static Gate x(int target) { return {GateKind::PauliX, target, -1, 0.0}; }

    /// Qubits the gate acts on, control first for CNOT.
    int arity() const noexcept { return kind == GateKind::CNOT ? 2 : 1; }
    int qubit(int k) const noexcept { return (kind == GateKind::CNOT && k == 0) ? control : target; }

    bool operator==(const Gate &) const = default;
};

/// Throws InvalidGate if the gate does not fit a register of `n_qubits`.
void validate_gate(const Gate &gate, int n_qubits);

std::string to_string(const Gate &gate);

class Circuit {
  public:
    explicit Circuit(int n_qubits);

    int n_qubits() const noexcept { return n_qubits_; }
    std::span<const Gate> gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }

    /// Validates before appending.
    Circuit &add(const Gate &gate);
    Circuit &ry(int target, double angle) { return add(Gate::ry(target, angle)); }
    Circuit &cnot(int control, int target) { return add(Gate::cnot(control, target)); }
    Circuit &x(int target) { return add(Gate::x(target)); }

    /// Appends all gates of `other` (same register size required).
    Circuit &append(const Circuit &other);

    /// Replaces the angle of the RY gate at `index`.
    void set_angle(std::size_t index, double angle);

    bool operator==(const Circuit &) const = default;

  private:
    int n_qubits_;
    std::vector<Gate> gates_;
};

/// Number of layers when gates are packed greedily and gates sharing a qubit serialize.
int circuit_depth(const Circuit &circuit);
std::size_t gate_count(const Circuit &circuit);

StateVector apply_gate(StateVector state, const Gate &gate);

/// Applies every gate of `circuit` to |00...0>.
StateVector run(const Circuit &circuit);

double prob_all_zero(const StateVector &state);
double prob_qubit_one(const StateVector &state, int qubit);

struct Readout {
    enum class Kind : std::uint8_t { AllZero, QubitOne };
    Kind kind = Kind::AllZero;
    int qubit = 0;

    static Readout all_zero() { return {Kind::AllZero, 0}; }
    static Readout qubit_one(int qubit) { return {Kind::QubitOne, qubit}; }
};

double measure(const StateVector &state, const Readout &readout);

struct NoiseConfig {
    double p_flip = 0.0;
    int trajectories = 1024;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless p_flip in [0,1] and trajectories >= 1.
    void validate() const;
};

struct NoisyEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    int trajectories = 0;
};

/// Monte-Carlo estimate of the readout under a bit-flip channel: after every gate each
/// qubit the gate touches receives X with probability p_flip.
///
/// Flips that follow the last gate on a qubit commute with nothing else in the circuit,
/// so they are averaged in closed form at readout instead of sampled. The estimator
/// stays unbiased and its variance drops. p_flip == 0 short-circuits to the noiseless
/// readout so both paths agree exactly.
NoisyEstimate run_noisy(const Circuit &circuit, const NoiseConfig &noise, const Readout &readout);

/// The trajectory machinery behind run_noisy, for callers that evaluate several circuits
/// sharing one gate layout under common random flips (shifted copies of a circuit).
class TrajectorySampler {
  public:
    /// p_flip must be > 0; angles of `circuit` are irrelevant, only its layout is used.
    TrajectorySampler(const Circuit &circuit, const NoiseConfig &noise, const Readout &readout);

    /// Flips of the next trajectory: bit q of flips[g] means X on qubit q right after gate g.
    void draw(std::vector<std::uint32_t> &flips);

    /// Readout of a trajectory's final state, with the folded final-layer flips averaged out.
    double readout(const StateVector &state) const;

  private:
    std::vector<Gate> gates_;
    std::vector<std::uint32_t> sampled_;  // per gate: touched qubits whose flip is sampled
    Readout readout_;
    double p_;
    bool readout_folded_ = false;
    std::vector<double> weight_;  // AllZero readout weights over the folded flip layer
    bool always_;
    std::uint64_t threshold_;
    std::mt19937_64 rng_;
};

/// Applies X to every qubit set in `mask`.
void apply_flips(StateVector &state, std::uint32_t mask);

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qpulsar

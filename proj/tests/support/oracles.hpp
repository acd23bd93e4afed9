// Independent reference implementations used only as test oracles.

#pragma once

#include "qpulsar/circuits.hpp"
#include "qpulsar/kernel.hpp"
#include "qpulsar/qcnn.hpp"
#include "qpulsar/statevector.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline Eigen::Matrix2cd ry_2x2(double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    Eigen::Matrix2cd m;
    m << c, -s, s, c;
    return m;
}

inline Eigen::Matrix2cd x_2x2() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

/// Full 2^n operator of a one-qubit matrix on `qubit` (qubit i is bit i of the index).
inline CMatrix embed_1q(const Eigen::Matrix2cd &u, int qubit, int n) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t bit = std::size_t{1} << qubit;
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~bit) == (c & ~bit)) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u((r & bit) ? 1 : 0, (c & bit) ? 1 : 0);
            }
        }
    }
    return m;
}

/// Permutation |i> -> |i xor t> when bit c of i is set.
inline CMatrix cnot_full(int control, int target, int n) {
    const std::size_t dim = std::size_t{1} << n;
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t j = (i >> control) & 1U ? i ^ (std::size_t{1} << target) : i;
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return m;
}

inline CMatrix gate_matrix(const qpulsar::Gate &g, int n) {
    switch (g.kind) {
        case qpulsar::GateKind::RY:
            return embed_1q(ry_2x2(g.angle), g.target, n);
        case qpulsar::GateKind::CNOT:
            return cnot_full(g.control, g.target, n);
        case qpulsar::GateKind::PauliX:
            return embed_1q(x_2x2(), g.target, n);
    }
    return {};
}

inline CVector zero_state(int n) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    v(0) = 1.0;
    return v;
}

/// Dense matrix-vector simulation of a circuit from |0...0>.
inline CVector simulate(const qpulsar::Circuit &circuit) {
    CVector v = zero_state(circuit.n_qubits());
    for (const auto &g : circuit.gates()) {
        v = gate_matrix(g, circuit.n_qubits()) * v;
    }
    return v;
}

inline double prob_one(const CVector &v, int qubit) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if ((static_cast<std::size_t>(i) >> qubit) & 1U) {
            p += std::norm(v(i));
        }
    }
    return p;
}

/// Exact expectation under the bit-flip channel: after each gate, every touched qubit
/// passes through rho -> (1-p) rho + p X rho X.
inline CMatrix density_noisy(const qpulsar::Circuit &circuit, double p) {
    const int n = circuit.n_qubits();
    const CVector z = zero_state(n);
    CMatrix rho = z * z.adjoint();
    for (const auto &g : circuit.gates()) {
        const CMatrix u = gate_matrix(g, n);
        rho = u * rho * u.adjoint();
        for (int k = 0; k < g.arity(); ++k) {
            const CMatrix x = embed_1q(x_2x2(), g.qubit(k), n);
            rho = (1.0 - p) * rho + p * (x * rho * x);
        }
    }
    return rho;
}

inline double density_prob_one(const CMatrix &rho, int qubit) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        if ((static_cast<std::size_t>(i) >> qubit) & 1U) {
            p += rho(i, i).real();
        }
    }
    return p;
}

/// prod_i cos^2((x_i - x'_i) / 2).
inline double kernel_product(std::span<const double> x, std::span<const double> xp) {
    double k = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = std::cos((x[i] - xp[i]) / 2.0);
        k *= c * c;
    }
    return k;
}

/// Noisy fidelity kernel in closed form. Each qubit carries RY(x), flip, RY(-x'), flip,
/// independently of the others, so the all-zero probability factorizes.
inline double kernel_product_noisy(std::span<const double> x, std::span<const double> xp, double p) {
    double k = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        // No middle flip: RY(-x') RY(x)|0> = RY(x - x')|0>.
        // Middle flip: X RY(x)|0> = RY(pi - x)|0>, so the pair acts as RY(pi - x - x').
        const double same = std::pow(std::cos((x[i] - xp[i]) / 2.0), 2);
        const double flipped_mid = std::pow(std::sin((x[i] + xp[i]) / 2.0), 2);
        // The final flip exchanges P(0) and P(1).
        const double p0_nomid = (1.0 - p) * same + p * (1.0 - same);
        const double p0_mid = (1.0 - p) * flipped_mid + p * (1.0 - flipped_mid);
        k *= (1.0 - p) * p0_nomid + p * p0_mid;
    }
    return k;
}

inline double central_difference(const std::function<double(std::span<const double>)> &f,
                                  std::vector<double> theta, std::size_t k, double h) {
    const double t = theta[k];
    theta[k] = t + h;
    const double plus = f(theta);
    theta[k] = t - h;
    const double minus = f(theta);
    return (plus - minus) / (2.0 * h);
}

/// Parameter shift done the slow way: one run_noisy per shifted gate, all with the seed
/// of `noise`, so the flip schedules coincide with the fast path.
inline std::vector<double> naive_shift_gradient(const qpulsar::QcnnModel &model, std::span<const double> x,
                                                const qpulsar::NoiseConfig &noise) {
    qpulsar::QcnnCircuit qc = qpulsar::build_qcnn_tracked(model.arch, model.theta, x);
    const auto readout = qpulsar::Readout::qubit_one(qc.readout_qubit);
    std::vector<double> grad(model.theta.size(), 0.0);
    for (std::size_t g = 0; g < qc.circuit.size(); ++g) {
        const int slot = qc.param_slot[g];
        if (slot < 0) {
            continue;
        }
        const double angle = qc.circuit.gates()[g].angle;
        qc.circuit.set_angle(g, angle + std::numbers::pi / 2.0);
        const double plus = qpulsar::run_noisy(qc.circuit, noise, readout).mean;
        qc.circuit.set_angle(g, angle - std::numbers::pi / 2.0);
        const double minus = qpulsar::run_noisy(qc.circuit, noise, readout).mean;
        qc.circuit.set_angle(g, angle);
        grad[static_cast<std::size_t>(slot)] += 0.5 * (plus - minus);
    }
    return grad;
}

struct DualSolution {
    std::vector<double> alpha;
    double bias = 0.0;
};

/// Soft-margin SVM dual solved by enumerating every (lower, free, upper) status pattern
/// and keeping the first pattern whose linear KKT system yields a consistent point.
/// The bias is unique with free vectors; otherwise the midpoint of its feasible interval.
inline std::optional<DualSolution> brute_force_dual(const Eigen::MatrixXd &k, const std::vector<int> &y, double c,
                                                    double tol = 1e-9) {
    const int n = static_cast<int>(y.size());
    int patterns = 1;
    for (int i = 0; i < n; ++i) {
        patterns *= 3;
    }
    for (int code = 0; code < patterns; ++code) {
        std::vector<int> status(static_cast<std::size_t>(n));  // 0 lower, 1 free, 2 upper
        int rest = code;
        for (int i = 0; i < n; ++i) {
            status[static_cast<std::size_t>(i)] = rest % 3;
            rest /= 3;
        }
        std::vector<int> free;
        for (int i = 0; i < n; ++i) {
            if (status[static_cast<std::size_t>(i)] == 1) {
                free.push_back(i);
            }
        }
        std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            if (status[static_cast<std::size_t>(i)] == 2) {
                alpha[static_cast<std::size_t>(i)] = c;
            }
        }
        const auto yi = [&](int i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };
        double bias = 0.0;
        const int m = static_cast<int>(free.size());
        if (m > 0) {
            // Unknowns alpha_F and b: y_i f(x_i) = 1 on F, sum_j alpha_j y_j = 0.
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
            for (int r = 0; r < m; ++r) {
                const int i = free[static_cast<std::size_t>(r)];
                double fixed = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (status[static_cast<std::size_t>(j)] == 2) {
                        fixed += c * yi(j) * k(i, j);
                    }
                }
                for (int s = 0; s < m; ++s) {
                    const int j = free[static_cast<std::size_t>(s)];
                    a(r, s) = yi(j) * k(i, j);
                }
                a(r, m) = 1.0;
                rhs(r) = yi(i) - fixed;
            }
            double fixed_sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (status[static_cast<std::size_t>(j)] == 2) {
                    fixed_sum += c * yi(j);
                }
            }
            for (int s = 0; s < m; ++s) {
                a(m, s) = yi(free[static_cast<std::size_t>(s)]);
            }
            rhs(m) = -fixed_sum;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (!lu.isInvertible()) {
                continue;
            }
            const Eigen::VectorXd sol = lu.solve(rhs);
            bool inside = true;
            for (int s = 0; s < m; ++s) {
                const double v = sol(s);
                // A free value on a bound leaves the bias undetermined; the bounded pattern covers it.
                if (!(v > tol && v < c - tol)) {
                    inside = false;
                }
                alpha[static_cast<std::size_t>(free[static_cast<std::size_t>(s)])] = v;
            }
            if (!inside) {
                continue;
            }
            bias = sol(m);
        } else {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                sum += alpha[static_cast<std::size_t>(j)] * yi(j);
            }
            if (std::abs(sum) > tol) {
                continue;
            }
        }

        // Remaining KKT conditions on bounded indices; collect the bias interval.
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            double g = 0.0;
            for (int j = 0; j < n; ++j) {
                g += alpha[static_cast<std::size_t>(j)] * yi(j) * k(i, j);
            }
            const int st = status[static_cast<std::size_t>(i)];
            if (st == 1) {
                continue;
            }
            // lower: y (g + b) >= 1; upper: y (g + b) <= 1.
            const bool lower_bound_on_b = (st == 0) == (y[static_cast<std::size_t>(i)] == 1);
            const double edge = yi(i) - g;
            if (lower_bound_on_b) {
                lo = std::max(lo, edge);
            } else {
                hi = std::min(hi, edge);
            }
            if (m > 0) {
                const double margin = yi(i) * (g + bias);
                ok = st == 0 ? margin >= 1.0 - 1e-7 : margin <= 1.0 + 1e-7;
            }
        }
        if (!ok) {
            continue;
        }
        if (m == 0) {
            if (!(lo <= hi + 1e-9) || !std::isfinite(lo) || !std::isfinite(hi)) {
                continue;
            }
            bias = 0.5 * (lo + hi);
        }
        return DualSolution{alpha, bias};
    }
    return std::nullopt;
}

inline double dual_decision(const DualSolution &s, const std::vector<int> &y, std::span<const double> kernel_row) {
    double f = s.bias;
    for (std::size_t i = 0; i < y.size(); ++i) {
        f += s.alpha[i] * y[i] * kernel_row[i];
    }
    return f;
}

}  // namespace oracle

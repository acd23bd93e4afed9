#include "qpulsar/svm.hpp"

#include "qpulsar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpulsar {

namespace {

constexpr double kTau = 1e-12;
constexpr double kSnap = 1e-12;

struct Solver {
    const Matrix &k;
    const std::vector<int> &y;
    double c;
    double eps;
    std::vector<double> alpha;
    std::vector<double> grad;  // Q alpha - e, Q_ij = y_i y_j K_ij

    double q(std::size_t i, std::size_t j) const { return y[i] * y[j] * k(i, j); }
    bool at_upper(std::size_t i) const { return alpha[i] >= c; }
    bool at_lower(std::size_t i) const { return alpha[i] <= 0.0; }

    // Maximal violating index i, then the j with the largest second-order objective decrease.
    bool select(std::size_t &out_i, std::size_t &out_j) const {
        const std::size_t n = alpha.size();
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == +1) {
                if (!at_upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!at_lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                i = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i < 0) {
            return false;
        }
        const auto iu = static_cast<std::size_t>(i);

        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        for (std::size_t t = 0; t < n; ++t) {
            double grad_diff = 0.0;
            if (y[t] == +1) {
                if (at_lower(t)) {
                    continue;
                }
                gmax2 = std::max(gmax2, grad[t]);
                grad_diff = gmax + grad[t];
            } else {
                if (at_upper(t)) {
                    continue;
                }
                gmax2 = std::max(gmax2, -grad[t]);
                grad_diff = gmax - grad[t];
            }
            if (grad_diff > 0.0) {
                double quad = k(iu, iu) + k(t, t) - 2.0 * k(iu, t);
                if (quad <= 0.0) {
                    quad = kTau;
                }
                const double obj = -(grad_diff * grad_diff) / quad;
                if (obj <= best) {
                    best = obj;
                    j = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        if (gmax + gmax2 < eps || j < 0) {
            return false;
        }
        out_i = iu;
        out_j = static_cast<std::size_t>(j);
        return true;
    }

    void snap(double &a) const {
        if (a >= c * (1.0 - kSnap)) {
            a = c;
        } else if (a <= c * kSnap) {
            a = 0.0;
        }
    }

    void update(std::size_t i, std::size_t j) {
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        double &ai = alpha[i];
        double &aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = k(i, i) + k(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > c) {
                    ai = c;
                    aj = c - diff;
                }
            } else if (aj > c) {
                aj = c;
                ai = c + diff;
            }
        } else {
            double quad = k(i, i) + k(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) {
                    ai = c;
                    aj = sum - c;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > c) {
                if (aj > c) {
                    aj = c;
                    ai = sum - c;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }
        // Clipping arithmetic can leave a multiplier an ulp inside a bound, where it would
        // be misread as free.
        snap(ai);
        snap(aj);
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (std::size_t t = 0; t < alpha.size(); ++t) {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Average of y_i G_i over free vectors, else the midpoint of the feasible interval.
    double rho() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            const double yg = y[i] * grad[i];
            if (at_upper(i)) {
                if (y[i] == -1) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else if (at_lower(i)) {
                if (y[i] == +1) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        return n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    }
};

}  // namespace

double SvmModel::decision(std::span<const double> kernel_row) const {
    if (kernel_row.size() != alpha.size()) {
        throw std::invalid_argument("kernel row has length " + std::to_string(kernel_row.size()) + ", model has " +
                                    std::to_string(alpha.size()) + " training samples");
    }
    double f = bias;
    for (const std::size_t i : support) {
        f += alpha[i] * y[i] * kernel_row[i];
    }
    return f;
}

SvmModel svm_fit(const Matrix &gram, std::span<const int> labels, const SvmParams &params) {
    const std::size_t n = gram.rows();
    if (gram.cols() != n) {
        throw std::invalid_argument("Gram matrix must be square");
    }
    if (labels.size() != n) {
        throw std::invalid_argument("label count does not match Gram matrix size");
    }
    if (n == 0) {
        throw std::invalid_argument("empty training set");
    }
    if (!(params.c > 0.0) || !(params.tol > 0.0)) {
        throw std::invalid_argument("C and tol must be positive");
    }
    std::vector<int> y(n);
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
        y[i] = labels[i] == 1 ? +1 : -1;
        has_pos = has_pos || y[i] == +1;
        has_neg = has_neg || y[i] == -1;
    }
    if (!has_pos || !has_neg) {
        throw DegenerateProblem("SVM training labels contain a single class");
    }

    Solver solver{gram, y, params.c, params.tol, std::vector<double>(n, 0.0), std::vector<double>(n, -1.0)};
    const std::size_t max_iter =
        params.max_iterations > 0 ? params.max_iterations : std::max<std::size_t>(10 * n * n, 10000);

    SvmModel model;
    std::size_t i = 0;
    std::size_t j = 0;
    while (model.iterations < max_iter) {
        if (!solver.select(i, j)) {
            model.converged = true;
            break;
        }
        solver.update(i, j);
        ++model.iterations;
    }
    if (!model.converged) {
        model.converged = !solver.select(i, j);
    }

    model.bias = -solver.rho();
    model.alpha = std::move(solver.alpha);
    model.y = std::move(y);
    model.c = params.c;
    for (std::size_t t = 0; t < n; ++t) {
        if (model.alpha[t] > 0.0) {
            model.support.push_back(t);
        }
    }
    return model;
}

int svm_predict(const SvmModel &model, std::span<const double> kernel_row) {
    return model.decision(kernel_row) >= 0.0 ? 1 : 0;
}

}  // namespace qpulsar

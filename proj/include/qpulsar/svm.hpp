// Soft-margin C-SVM on a precomputed kernel, solved in the dual by SMO with
// second-order working-set selection.

#pragma once

#include "qpulsar/kernel.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace qpulsar {

struct SvmParams {
    double c = 1.0;
    /// KKT violation at which the solver stops.
    double tol = 1e-3;
    /// 0 selects the default bound: 10n passes of n pair updates (at least 10000 updates).
    std::size_t max_iterations = 0;
};

struct SvmModel {
    std::vector<double> alpha;  // dual coefficients, 0 <= alpha_i <= C
    std::vector<int> y;         // labels in {-1, +1}
    double bias = 0.0;
    double c = 1.0;
    std::vector<std::size_t> support;  // indices with alpha_i > 0
    std::size_t iterations = 0;
    bool converged = false;

    /// sum_i alpha_i y_i k_i + bias. Throws std::invalid_argument on length mismatch.
    double decision(std::span<const double> kernel_row) const;
};

/// Labels use the public {0, 1} convention. Throws DegenerateProblem when only one class
/// is present and std::invalid_argument on shape or parameter errors.
SvmModel svm_fit(const Matrix &gram, std::span<const int> labels, const SvmParams &params = {});

/// 1 when decision >= 0 (ties go to the positive class), else 0.
int svm_predict(const SvmModel &model, std::span<const double> kernel_row);

}  // namespace qpulsar

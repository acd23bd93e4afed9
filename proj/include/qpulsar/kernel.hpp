// Fidelity kernel evaluation and kernel matrix assembly.

#pragma once

#include "qpulsar/circuits.hpp"
#include "qpulsar/statevector.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace qpulsar {

/// Dense row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Exact statevector readout, or a trajectory estimate under bit-flip noise.
struct KernelMode {
    std::optional<NoiseConfig> noise;

    static KernelMode exact() { return {}; }
    static KernelMode noisy(NoiseConfig config) { return {config}; }
    bool is_exact() const { return !noise.has_value(); }
};

/// |<0..0| S(x')^dagger S(x) |0..0>|^2 read off the simulated kernel circuit.
double kernel_value(std::span<const double> x, std::span<const double> x_prime, const KernelMode &mode = {});


/// exp(-gamma ||x - x'||^2); gamma must be positive.
double rbf_kernel(std::span<const double> x, std::span<const double> x_prime, double gamma);

struct KernelMatrix {
    Matrix values;
    /// Circuit executions the quantum runtime model charges for this matrix.
    std::uint64_t executions = 0;
};

/// Square Gram matrix over `train`. Exact mode simulates the upper triangle and mirrors it;
/// noisy mode simulates every entry and returns (K + K^T) / 2. Executions reported as n^2.
KernelMatrix gram_matrix(std::span<const FeatureVector> train, const KernelMode &mode = {});

/// Row i holds kernel values of test[i] against every training sample (n_test x n_train).
/// Executions reported as n_train * n_test.
KernelMatrix cross_kernel(std::span<const FeatureVector> train, std::span<const FeatureVector> test,
                          const KernelMode &mode = {});

/// Classical RBF analogues of the two functions above, used by the classical SVM baseline.
Matrix rbf_gram(std::span<const FeatureVector> train, double gamma);
Matrix rbf_cross(std::span<const FeatureVector> train, std::span<const FeatureVector> test, double gamma);

/// Row-major CSV, 17 significant digits, no header.
void write_matrix_csv(const Matrix &matrix, const std::filesystem::path &path);
/// Throws ParseError on ragged rows or non-numeric cells.
Matrix read_matrix_csv(const std::filesystem::path &path);

}  // namespace qpulsar

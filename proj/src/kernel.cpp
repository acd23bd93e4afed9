#include "qpulsar/kernel.hpp"

#include "qpulsar/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qpulsar {

namespace {

NoiseConfig entry_noise(const NoiseConfig &base, std::size_t i, std::size_t j) {
    NoiseConfig cfg = base;
    cfg.seed = mix_seed(mix_seed(base.seed, i), j);
    return cfg;
}

}  // namespace

double kernel_value(std::span<const double> x, std::span<const double> x_prime, const KernelMode &mode) {
    const Circuit circuit = qsvm_circuit(x, x_prime);
    if (mode.is_exact()) {
        return prob_all_zero(run(circuit));
    }
    return run_noisy(circuit, *mode.noise, Readout::all_zero()).mean;
}

double rbf_kernel(std::span<const double> x, std::span<const double> x_prime, double gamma) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("RBF gamma must be positive");
    }
    if (x.size() != x_prime.size()) {
        throw std::invalid_argument("feature vectors differ in length");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_prime[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

KernelMatrix gram_matrix(std::span<const FeatureVector> train, const KernelMode &mode) {
    if (train.empty()) {
        throw std::invalid_argument("Gram matrix of an empty set");
    }
    const std::size_t n = train.size();
    KernelMatrix out{Matrix(n, n), static_cast<std::uint64_t>(n) * n};
    Matrix &k = out.values;
    if (mode.is_exact()) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                k(i, j) = kernel_value(train[i], train[j], mode);
                k(j, i) = k(i, j);
            }
        }
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            k(i, j) = kernel_value(train[i], train[j], KernelMode::noisy(entry_noise(*mode.noise, i, j)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sym = 0.5 * (k(i, j) + k(j, i));
            k(i, j) = sym;
            k(j, i) = sym;
        }
    }
    return out;
}

KernelMatrix cross_kernel(std::span<const FeatureVector> train, std::span<const FeatureVector> test,
                          const KernelMode &mode) {
    if (train.empty() || test.empty()) {
        throw std::invalid_argument("cross kernel of an empty set");
    }
    KernelMatrix out{Matrix(test.size(), train.size()), static_cast<std::uint64_t>(train.size()) * test.size()};
    // Streams offset past any Gram index so train/test entries never share a seed.
    const std::size_t offset = train.size();
    for (std::size_t i = 0; i < test.size(); ++i) {
        for (std::size_t j = 0; j < train.size(); ++j) {
            out.values(i, j) = mode.is_exact()
                                   ? kernel_value(test[i], train[j], mode)
                                   : kernel_value(test[i], train[j],
                                                  KernelMode::noisy(entry_noise(*mode.noise, offset + i, j)));
        }
    }
    return out;
}

Matrix rbf_gram(std::span<const FeatureVector> train, double gamma) {
    const std::size_t n = train.size();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            k(i, j) = rbf_kernel(train[i], train[j], gamma);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

Matrix rbf_cross(std::span<const FeatureVector> train, std::span<const FeatureVector> test, double gamma) {
    Matrix k(test.size(), train.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        for (std::size_t j = 0; j < train.size(); ++j) {
            k(i, j) = rbf_kernel(test[i], train[j], gamma);
        }
    }
    return k;
}

void write_matrix_csv(const Matrix &matrix, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << std::setprecision(17);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (c != 0) {
                out << ',';
            }
            out << matrix(r, c);
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t end = line.find(',', start);
            const std::string_view cell(line.data() + start, (end == std::string::npos ? line.size() : end) - start);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
                throw ParseError(line_no, "non-numeric matrix cell '" + std::string(cell) + "'");
            }
            values.push_back(v);
            ++count;
            if (end == std::string::npos) {
                break;
            }
            start = end + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw ParseError(line_no, "expected " + std::to_string(cols) + " columns, found " + std::to_string(count));
        }
        ++rows;
    }
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = values[r * cols + c];
        }
    }
    return m;
}

}  // namespace qpulsar

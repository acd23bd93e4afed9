#include "qpulsar/errors.hpp"
#include "qpulsar/kernel.hpp"

#include "../support/oracles.hpp"
#include "../support/random_circuits.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace qpulsar;

namespace {

std::vector<FeatureVector> random_set(std::mt19937_64 &rng, std::size_t n) {
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(testing_support::features(rng));
    }
    return out;
}

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("qpulsar_test_" + name);
}

}  // namespace

TEST_CASE("kernel value matches the closed-form product over 500 pairs") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = testing_support::features(rng);
        const auto xp = testing_support::features(rng);
        REQUIRE(std::abs(kernel_value(x, xp) - oracle::kernel_product(x, xp)) < 1e-10);
    }
}

TEST_CASE("kernel value examples") {
    const std::vector<double> zero(8, 0.0);
    CHECK(kernel_value(zero, zero) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> half(8, 0.0);
    half[3] = std::numbers::pi / 2;
    CHECK(kernel_value(half, zero) == doctest::Approx(0.5).epsilon(1e-12));
    std::vector<double> flip(8, 0.0);
    flip[7] = std::numbers::pi;
    CHECK(kernel_value(flip, zero) < 1e-30);
}

TEST_CASE("kernel value is symmetric and bounded") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = testing_support::features(rng);
        const auto xp = testing_support::features(rng);
        const double a = kernel_value(x, xp);
        REQUIRE(a == doctest::Approx(kernel_value(xp, x)).epsilon(1e-12));
        REQUIRE(a >= 0.0);
        REQUIRE(a <= 1.0 + 1e-12);
    }
}

TEST_CASE("Gram matrix: symmetric, unit diagonal, positive semidefinite") {
    std::mt19937_64 rng(12);
    const auto train = random_set(rng, 30);
    const KernelMatrix g = gram_matrix(train);
    REQUIRE(g.values.rows() == 30);
    REQUIRE(g.values.cols() == 30);
    Eigen::MatrixXd k(30, 30);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(g.values(i, i) == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t j = 0; j < 30; ++j) {
            REQUIRE(g.values(i, j) == g.values(j, i));
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g.values(i, j);
            REQUIRE(std::abs(g.values(i, j) - oracle::kernel_product(train[i], train[j])) < 1e-10);
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("execution counts follow n^2 and n_train * n_test") {
    std::mt19937_64 rng(13);
    const auto train = random_set(rng, 7);
    const auto test = random_set(rng, 5);
    CHECK(gram_matrix(train).executions == 49);
    const KernelMatrix cross = cross_kernel(train, test);
    CHECK(cross.executions == 35);
    CHECK(cross.values.rows() == 5);
    CHECK(cross.values.cols() == 7);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 7; ++j) {
            REQUIRE(std::abs(cross.values(i, j) - oracle::kernel_product(test[i], train[j])) < 1e-10);
        }
    }
}

TEST_CASE("noisy kernel approaches the per-qubit flip channel") {
    std::mt19937_64 rng(14);
    for (const double p : {0.01, 0.1, 0.5}) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto x = testing_support::features(rng);
            const auto xp = testing_support::features(rng);
            const NoiseConfig cfg{p, 4000, rng()};
            const double got = kernel_value(x, xp, KernelMode::noisy(cfg));
            const Circuit c = qsvm_circuit(x, xp);
            const NoisyEstimate est = run_noisy(c, cfg, Readout::all_zero());
            CHECK(got == est.mean);
            CHECK(std::abs(got - oracle::kernel_product_noisy(x, xp, p)) <= 5 * est.standard_error + 1e-12);
        }
    }
}

TEST_CASE("noisy Gram matrix is symmetrised and deterministic under a seed") {
    std::mt19937_64 rng(15);
    const auto train = random_set(rng, 6);
    const KernelMode mode = KernelMode::noisy({0.1, 64, 77});
    const KernelMatrix a = gram_matrix(train, mode);
    const KernelMatrix b = gram_matrix(train, mode);
    CHECK(a.values == b.values);
    CHECK(a.executions == 36);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            REQUIRE(a.values(i, j) == a.values(j, i));
        }
    }
    const Matrix clean = gram_matrix(train, KernelMode::noisy({0.0, 64, 77})).values;
    const Matrix exact = gram_matrix(train).values;
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            REQUIRE(std::abs(clean(i, j) - exact(i, j)) < 1e-14);
        }
    }
}

TEST_CASE("fully depolarising flips give an input-independent kernel") {
    // Every readout bit is a fair coin, so each entry is exactly 2^-8 whatever the inputs.
    std::mt19937_64 rng(17);
    const auto train = random_set(rng, 12);
    const auto test = random_set(rng, 9);
    const KernelMode mode = KernelMode::noisy({0.5, 16, 3});
    const Matrix gram = gram_matrix(train, mode).values;
    const Matrix cross = cross_kernel(train, test, mode).values;
    for (std::size_t i = 0; i < gram.rows(); ++i) {
        for (std::size_t j = 0; j < gram.cols(); ++j) {
            REQUIRE(gram(i, j) == 1.0 / 256.0);
        }
    }
    for (std::size_t i = 0; i < cross.rows(); ++i) {
        for (std::size_t j = 0; j < cross.cols(); ++j) {
            REQUIRE(cross(i, j) == 1.0 / 256.0);
        }
    }
}

TEST_CASE("RBF kernel") {
    const std::vector<double> a = {0.0, 0.0};
    const std::vector<double> b = {1.0, 1.0};
    CHECK(rbf_kernel(a, a, 0.3) == 1.0);
    CHECK(rbf_kernel(a, b, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(rbf_kernel(a, b, 0.0), std::invalid_argument);
    const std::vector<FeatureVector> train = {a, b};
    const Matrix g = rbf_gram(train, 0.5);
    CHECK(g(0, 1) == g(1, 0));
    CHECK(g(1, 1) == 1.0);
    const Matrix cross = rbf_cross(train, std::vector<FeatureVector>{b}, 0.5);
    CHECK(cross.rows() == 1);
    CHECK(cross(0, 1) == 1.0);
}

TEST_CASE("matrix CSV round-trips bit-exactly") {
    std::mt19937_64 rng(16);
    Matrix m(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            m(i, j) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * std::pow(10.0, static_cast<double>(i));
        }
    }
    const auto path = temp_file("matrix.csv");
    write_matrix_csv(m, path);
    CHECK(read_matrix_csv(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("matrix CSV rejects ragged and non-numeric input") {
    const auto path = temp_file("bad.csv");
    {
        std::ofstream(path) << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_matrix_csv(path), ParseError);
    {
        std::ofstream(path) << "1,abc\n";
    }
    CHECK_THROWS_AS(read_matrix_csv(path), ParseError);
    std::filesystem::remove(path);
}

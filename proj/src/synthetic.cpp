#include "qpulsar/synthetic.hpp"

#include "random_util.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qpulsar {

namespace {

struct FeatureShape {
    double mean;
    double sd;
    bool log_normal;  // right-skewed, strictly positive
};

// Integrated profile mean, sd, kurtosis, skewness; DM-SNR mean, sd, kurtosis, skewness.
constexpr std::array<FeatureShape, kHtru2Features> kNegative = {{
    {116.6, 17.5, false},
    {47.3, 6.2, false},
    {0.21, 0.33, false},
    {0.38, 1.03, false},
    {8.86, 24.4, true},
    {23.3, 16.7, true},
    {8.86, 4.24, false},
    {113.6, 106.0, true},
}};

constexpr std::array<FeatureShape, kHtru2Features> kPositive = {{
    {56.7, 30.0, false},
    {38.7, 8.0, false},
    {3.13, 1.87, false},
    {15.55, 14.0, true},
    {49.8, 45.3, true},
    {56.5, 19.7, true},
    {2.76, 3.1, false},
    {17.9, 50.9, true},
}};

double standard_normal(std::mt19937_64 &rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u = 1.0 - detail::uniform_unit(rng);
    const double v = detail::uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

double draw(const FeatureShape &shape, std::mt19937_64 &rng) {
    const double z = standard_normal(rng);
    if (!shape.log_normal) {
        return shape.mean + shape.sd * z;
    }
    const double s2 = std::log1p((shape.sd * shape.sd) / (shape.mean * shape.mean));
    return std::exp(std::log(shape.mean) - 0.5 * s2 + std::sqrt(s2) * z);
}

}  // namespace

Dataset synthesize_htru2_like(std::size_t negatives, std::size_t positives, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset out;
    out.samples.reserve(negatives + positives);
    for (std::size_t i = 0; i < negatives + positives; ++i) {
        const int label = i < negatives ? 0 : 1;
        const auto &shapes = label == 0 ? kNegative : kPositive;
        Sample s;
        s.label = label;
        s.source_row = i;
        s.features.resize(kHtru2Features);
        for (std::size_t f = 0; f < kHtru2Features; ++f) {
            s.features[f] = draw(shapes[f], rng);
        }
        out.samples.push_back(std::move(s));
    }
    return out;
}

}  // namespace qpulsar

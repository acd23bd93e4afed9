#include "qpulsar/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qpulsar;

TEST_CASE("confusion counts") {
    CHECK(confusion(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}) == ConfusionMatrix{2, 1, 0, 0});
    CHECK(confusion(std::vector<int>{1, 1, 1, 1}, std::vector<int>{0, 0, 0, 0}) == ConfusionMatrix{0, 0, 4, 0});
    CHECK(confusion(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 1, 0, 0}) == ConfusionMatrix{1, 1, 1, 1});
    CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("symmetric 9/9/1/1 example") {
    const MetricsReport r = metrics({9, 9, 1, 1});
    for (const double v : {*r.accuracy, *r.recall, *r.specificity, *r.precision, *r.npv, *r.balanced_accuracy,
                           *r.g_mean}) {
        CHECK(v == doctest::Approx(0.9).epsilon(1e-15));
    }
    CHECK(*r.informedness == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("perfect classifier") {
    const MetricsReport r = metrics({5, 7, 0, 0});
    for (const auto &v : r.values()) {
        REQUIRE(v.has_value());
        CHECK(*v == 1.0);
    }
}

TEST_CASE("zero denominators are undefined and propagate") {
    const MetricsReport none_predicted = metrics({0, 5, 0, 3});
    CHECK_FALSE(none_predicted.precision.has_value());
    CHECK(none_predicted.recall == 0.0);
    CHECK(none_predicted.g_mean == 0.0);

    const MetricsReport no_positives = metrics({0, 4, 2, 0});
    CHECK_FALSE(no_positives.recall.has_value());
    CHECK_FALSE(no_positives.balanced_accuracy.has_value());
    CHECK_FALSE(no_positives.g_mean.has_value());
    CHECK_FALSE(no_positives.informedness.has_value());
    CHECK(no_positives.specificity == doctest::Approx(4.0 / 6.0));
    CHECK(no_positives.to_json().at("recall").is_null());
}

TEST_CASE("composite identities hold to 1e-12 over random confusion matrices") {
    std::mt19937_64 rng(70);
    std::uniform_int_distribution<std::size_t> count(0, 500);
    for (int trial = 0; trial < 2000; ++trial) {
        const ConfusionMatrix cm{count(rng) + 1, count(rng) + 1, count(rng), count(rng)};
        const MetricsReport r = metrics(cm);
        const double tp = static_cast<double>(cm.tp);
        const double tn = static_cast<double>(cm.tn);
        const double fp = static_cast<double>(cm.fp);
        const double fn = static_cast<double>(cm.fn);
        const double recall = tp / (tp + fn);
        const double spec = tn / (tn + fp);
        REQUIRE(std::abs(*r.accuracy - (tp + tn) / (tp + tn + fp + fn)) < 1e-12);
        REQUIRE(std::abs(*r.precision - tp / (tp + fp)) < 1e-12);
        REQUIRE(std::abs(*r.npv - tn / (tn + fn)) < 1e-12);
        REQUIRE(std::abs(*r.balanced_accuracy - 0.5 * (*r.recall + *r.specificity)) < 1e-12);
        REQUIRE(std::abs(*r.balanced_accuracy - (tp / (tp + fn) + tn / (tn + fp)) / 2) < 1e-12);
        REQUIRE(std::abs(*r.g_mean - std::sqrt(recall * spec)) < 1e-12);
        REQUIRE(std::abs(*r.informedness - (*r.recall + *r.specificity - 1.0)) < 1e-12);
        REQUIRE(std::abs(*r.informedness - (2.0 * *r.balanced_accuracy - 1.0)) < 1e-12);
    }
}

TEST_CASE("aggregation: mean, standard error, undefined counts") {
    MetricsReport a;
    a.accuracy = 0.9;
    MetricsReport b;
    b.accuracy = 1.0;
    const std::vector<MetricsReport> two = {a, b};
    const RunAggregate agg = aggregate_runs(two);
    CHECK(agg.runs == 2);
    CHECK(agg["accuracy"].mean == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(agg["accuracy"].standard_error == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(agg["accuracy"].stddev == doctest::Approx(std::sqrt(0.005)).epsilon(1e-12));
    CHECK(agg["recall"].defined == 0);
    CHECK(agg["recall"].undefined == 2);
    CHECK(agg.to_json().at("metrics").at("recall").at("mean").is_null());
    CHECK_THROWS_AS(agg["f1"], std::out_of_range);

    const std::vector<MetricsReport> same = {metrics({3, 4, 1, 2}), metrics({3, 4, 1, 2}), metrics({3, 4, 1, 2})};
    for (const auto &m : aggregate_runs(same).metrics) {
        CHECK(m.standard_error == 0.0);
    }
    const std::vector<MetricsReport> single = {metrics({3, 4, 1, 2})};
    CHECK(aggregate_runs(single)["accuracy"].standard_error == 0.0);
    CHECK(aggregate_runs(single)["accuracy"].defined == 1);
    CHECK_THROWS_AS(aggregate_runs(std::vector<MetricsReport>{}), std::invalid_argument);
}

TEST_CASE("summarize_values uses the n - 1 sample deviation") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    const MetricSummary s = summarize_values(v);
    CHECK(s.mean == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
    CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksa/estimator.hpp"
#include "ksa/synthetic.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <random>

using namespace ksa;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SurvivalDataset four_subjects() {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    Eigen::VectorXd t(4);
    t << 1, 2, 3, 4;
    return SurvivalDataset(X, t, {1, 0, 1, 1});
}

// Kernel with one fixed weight per training row, matched by first feature.
struct FixedWeightKernel final : Kernel {
    Eigen::VectorXd keys;
    Eigen::VectorXd w;
    double evaluate(const Eigen::VectorXd&, const Eigen::VectorXd& xp) const override {
        for (Eigen::Index i = 0; i < keys.size(); ++i)
            if (xp[0] == keys[i]) return w[i];
        return 0.0;
    }
};

}  // namespace

TEST_CASE("kaplan_meier hand curve") {
    const auto curve = kaplan_meier(four_subjects());
    REQUIRE(curve.grid.times == std::vector<double>{1, 2, 3, 4});
    CHECK(curve.values[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(curve.values[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(curve.values[2] == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(curve.values[3] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(curve.value_at(0.5) == 1.0);
    CHECK(curve.value_at(2.9) == 0.75);
}

TEST_CASE("kaplan_meier reduces to the empirical survival without censoring") {
    Eigen::VectorXd t(3);
    t << 1, 2, 3;
    SurvivalDataset data(Eigen::MatrixXd::Zero(3, 1), t, {1, 1, 1});
    const auto curve = kaplan_meier(data);
    CHECK(curve.value_at(1.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    SurvivalDataset censored(Eigen::MatrixXd::Zero(3, 1), t, {0, 0, 0});
    const auto flat = kaplan_meier(censored);
    for (double v : flat.values) CHECK(v == 1.0);
}

TEST_CASE("kaplan_meier matches the product-formula oracle on random data") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto data = oracle::random_dataset(rng, 5 + trial % 40, 1, 0.4);
        const auto curve = kaplan_meier(data);
        std::vector<double> times(data.size());
        std::vector<int> events(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            times[i] = data.time(i);
            events[i] = data.event(i);
        }
        const auto expected = oracle::km_product(times, events, curve.grid.times);
        for (std::size_t l = 0; l < expected.size(); ++l)
            CHECK(std::abs(curve.values[l] - expected[l]) < 1e-12);
    }
}

TEST_CASE("conditional KM with the constant kernel equals plain KM") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto data = oracle::random_dataset(rng, 4 + trial % 30, 2, 0.3);
        const auto km = kaplan_meier(data);
        FittedConditionalKM fit(data, std::make_shared<ConstantKernel>(),
                                build_time_grid(data));
        const auto curve = fit.predict(data.feature_row(0));
        REQUIRE(curve.values.size() == km.values.size());
        for (std::size_t l = 0; l < km.values.size(); ++l)
            CHECK(std::abs(curve.values[l] - km.values[l]) < 1e-9);
    }
}

TEST_CASE("conditional KM with one live neighbor is that subject's own curve") {
    const auto data = four_subjects();
    FittedConditionalKM fit(data, std::make_shared<BoxKernel>(1e-9), build_time_grid(data));
    // query at X_2 (death at t=3): curve steps to 0 there
    const auto dead = fit.predict(data.feature_row(2));
    CHECK(dead.value_at(2.9) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dead.value_at(3.0) == doctest::Approx(0.0).epsilon(1e-3));
    // query at X_1 (censored): flat 1
    const auto alive = fit.predict(data.feature_row(1));
    for (double v : alive.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("conditional KM hand case with weights 1/2, 1/2, 0") {
    Eigen::MatrixXd X(3, 1);
    X << 10, 20, 30;
    Eigen::VectorXd t(3);
    t << 1, 2, 3;
    SurvivalDataset data(X, t, {1, 1, 1});
    auto kernel = std::make_shared<FixedWeightKernel>();
    kernel->keys = X.col(0);
    kernel->w.resize(3);
    kernel->w << 0.5, 0.5, 0.0;
    FittedConditionalKM fit(data, kernel, build_time_grid(data));
    const auto curve = fit.predict(data.feature_row(0));
    CHECK(curve.values[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(curve.values[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(curve.values[2] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("kernel hazard values, bounds, and leave-one-out exclusion") {
    const auto data = four_subjects();
    FittedConditionalKM fit(data, std::make_shared<ConstantKernel>(), build_time_grid(data));
    const auto h = fit.hazard(data.feature_row(0));
    CHECK(h[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(h[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(h[2] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(h[3] == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : h) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // excluding a subject with a vanishing box kernel leaves no neighbors
    FittedConditionalKM tiny(data, std::make_shared<BoxKernel>(1e-12),
                             build_time_grid(data));
    const auto empty = tiny.hazard(data.feature_row(1), 1);
    for (double v : empty) CHECK(v == 0.0);

    CHECK_THROWS_AS(fit.hazard(data.feature_row(0), 99), std::invalid_argument);
}

TEST_CASE("LOO hazard ignores the excluded subject's time and event") {
    std::mt19937_64 rng(13);
    const auto base = oracle::random_dataset(rng, 12, 2, 0.3);
    const auto grid = build_time_grid(base);
    FittedConditionalKM fit(base, std::make_shared<GaussianEmbeddingKernel>(
                                      EmbeddingNet::basic(2)), grid);
    const auto h1 = fit.hazard(base.feature_row(3), 3);

    // perturb subject 3's label inside the same grid and refit
    Eigen::VectorXd t = base.times();
    std::vector<std::uint8_t> e = base.events();
    t[3] = grid.times[t[3] == grid.times.front() ? grid.size() - 1 : 0];
    e[3] = static_cast<std::uint8_t>(1 - e[3]);
    SurvivalDataset perturbed(base.features(), t, e);
    FittedConditionalKM fit2(perturbed, std::make_shared<GaussianEmbeddingKernel>(
                                            EmbeddingNet::basic(2)), grid);
    const auto h2 = fit2.hazard(perturbed.feature_row(3), 3);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t l = 0; l < h1.size(); ++l) CHECK(h1[l] == h2[l]);
}

TEST_CASE("a precomputed kernel drives the conditional KM at indexed points") {
    const auto data = four_subjects();
    Eigen::MatrixXd values(4, 4);
    values << 1.0, 0.5, 0.5, 0.0,
              0.5, 1.0, 0.5, 0.0,
              0.5, 0.5, 1.0, 0.0,
              0.0, 0.0, 0.0, 1.0;
    auto kernel = std::make_shared<PrecomputedKernel>(values);
    kernel->bind(data);
    FittedConditionalKM fit(data, kernel, build_time_grid(data));
    const auto curve = fit.predict(data.feature_row(3));
    // row 3 only weights itself: single-subject curve stepping to 0 at t = 4
    CHECK(curve.value_at(3.9) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(curve.value_at(4.0) == doctest::Approx(0.0).epsilon(1e-3));

    Eigen::VectorXd stranger(1);
    stranger << -42.0;
    CHECK_THROWS_AS(fit.predict(stranger), std::invalid_argument);
}

TEST_CASE("curves are monotone and consistent with their hazards") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = oracle::random_dataset(rng, 25, 2, 0.3);
        FittedConditionalKM fit(data,
                                std::make_shared<GaussianEmbeddingKernel>(
                                    EmbeddingNet::basic(2)),
                                build_time_grid(data));
        const Eigen::VectorXd x = data.feature_row(trial % data.size());
        const auto curve = fit.predict(x);
        const auto hazard = fit.hazard(x);
        double log_surv = 0.0;
        for (std::size_t l = 0; l < curve.values.size(); ++l) {
            if (l > 0) CHECK(curve.values[l] <= curve.values[l - 1]);
            CHECK(curve.values[l] >= 0.0);
            CHECK(curve.values[l] <= 1.0);
            log_surv += std::log(1.0 - hazard[l]);
            CHECK(std::abs(std::exp(log_surv) - curve.values[l]) < 1e-12);
        }
    }
}

TEST_CASE("KM tracks the analytic exponential curve at n = 10000") {
    SyntheticSpec spec;
    spec.n = 10000;
    spec.d = 1;
    spec.beta = Eigen::VectorXd::Zero(1);  // rate exp(0) = 1 for every subject
    spec.seed = 3;
    const auto data = generate_synthetic(spec);
    const auto curve = kaplan_meier(data.dataset);
    double worst = 0.0;
    for (std::size_t l = 0; l < curve.values.size(); ++l)
        worst = std::max(worst,
                         std::abs(curve.values[l] - std::exp(-curve.grid.times[l])));
    CHECK(worst <= 0.03);
}

TEST_CASE("median survival time hand cases") {
    SurvivalCurve a{{{2, 4, 6}, false}, {0.6, 0.4, 0.1}};
    CHECK(median_survival_time(a) == doctest::Approx(4.0));
    SurvivalCurve b{{{2, 4}, false}, {0.5, 0.2}};
    CHECK(median_survival_time(b) == doctest::Approx(3.0));
    SurvivalCurve c{{{1, 2, 3}, false}, {1.0, 1.0, 1.0}};
    CHECK(median_survival_time(c) == kInf);
}

TEST_CASE("median of a densely sampled exponential curve is near log 2") {
    const std::size_t m = 1000;
    SurvivalCurve curve;
    curve.grid.quantized = true;
    const double step = 3.0 / static_cast<double>(m - 1);
    for (std::size_t k = 0; k < m; ++k) {
        const double t = step * static_cast<double>(k);
        curve.grid.times.push_back(t);
        curve.values.push_back(std::exp(-t));
    }
    CHECK(std::abs(median_survival_time(curve) - std::log(2.0)) <= step);
}

TEST_CASE("mean survival time integrates the step curve exactly") {
    SurvivalCurve a{{{2, 4}, false}, {0.5, 0.0}};
    CHECK(mean_survival_time(a, 4.0) == doctest::Approx(3.0).epsilon(1e-15));
    SurvivalCurve flat{{{5}, false}, {1.0}};
    CHECK(mean_survival_time(flat, 9.0) == doctest::Approx(9.0).epsilon(1e-15));
    SurvivalCurve zero{{{0}, false}, {0.0}};
    CHECK(mean_survival_time(zero, 7.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(mean_survival_time(a, 3.0), std::invalid_argument);
}

TEST_CASE("time estimators wrap curves with finite fallbacks") {
    const auto data = four_subjects();
    auto fit = std::make_shared<FittedConditionalKM>(
        data, std::make_shared<ConstantKernel>(), build_time_grid(data));
    const auto median = make_time_estimator(fit);
    // KM curve: 0.75 on [1,3), 0.375 on [3,4): first <= 1/2 at 3, last >= 1/2 at 3
    CHECK(median(data.feature_row(0)) == doctest::Approx(3.0));

    // an all-censored model never crosses 1/2: falls back to the last grid time
    SurvivalDataset censored(data.features(), data.times(), {0, 0, 0, 0});
    auto flat_fit = std::make_shared<FittedConditionalKM>(
        censored, std::make_shared<ConstantKernel>(), build_time_grid(censored));
    const auto flat_median = make_time_estimator(flat_fit);
    CHECK(flat_median(data.feature_row(0)) == doctest::Approx(4.0));

    const auto mean = make_time_estimator(fit, TimeEstimate::Mean);
    // exact step integral of the KM curve up to t = 4
    CHECK(mean(data.feature_row(0)) ==
          doctest::Approx(1.0 + 0.75 * 2.0 + 0.375 * 1.0).epsilon(1e-9));
}

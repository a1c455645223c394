#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksa/eval.hpp"
#include "ksa/synthetic.hpp"
#include "oracles.hpp"

#include <random>

using namespace ksa;

namespace {

// Curves sampled from the analytic survival function of a synthetic model.
std::vector<SurvivalCurve> analytic_curves(const SyntheticData& synth,
                                           const SurvivalDataset& test) {
    const auto grid = build_time_grid(test);
    std::vector<SurvivalCurve> curves;
    curves.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        SurvivalCurve c;
        c.grid = grid;
        for (double t : grid.times) c.values.push_back(synth.survival(t, test.feature_row(i)));
        curves.push_back(std::move(c));
    }
    return curves;
}

std::vector<SurvivalCurve> random_curves(std::mt19937_64& rng, const TimeGrid& grid,
                                         std::size_t n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<SurvivalCurve> curves;
    for (std::size_t i = 0; i < n; ++i) {
        SurvivalCurve c;
        c.grid = grid;
        double v = 1.0;
        for (std::size_t l = 0; l < grid.size(); ++l) {
            v *= unif(rng);  // random non-increasing curve
            c.values.push_back(v);
        }
        // occasionally duplicate values to exercise ties
        if (i % 3 == 0 && c.values.size() > 1) c.values[1] = c.values[0];
        curves.push_back(std::move(c));
    }
    return curves;
}

}  // namespace

TEST_CASE("ctd hand cases") {
    TimeGrid grid{{1.0, 2.0}, false};
    Eigen::MatrixXd X(2, 1);
    X << 0, 1;
    Eigen::VectorXd t(2);
    t << 1, 2;
    SurvivalDataset test(X, t, {1, 1});

    SurvivalCurve low{grid, {0.3, 0.1}};
    SurvivalCurve high{grid, {0.9, 0.8}};
    const auto perfect = ctd_index({low, high}, test);
    CHECK(perfect.ctd == 1.0);
    CHECK(perfect.comparable_pairs == 1);

    const auto tied = ctd_index({high, high}, test);
    CHECK(tied.ctd == 0.5);

    SurvivalDataset no_events(X, t, {0, 0});
    CHECK_THROWS_AS(ctd_index({low, high}, no_events), std::invalid_argument);
}

TEST_CASE("ctd equals the exhaustive pair oracle on small instances") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + trial % 7;
        const auto data = oracle::random_dataset(rng, n, 1, 0.4);
        const auto grid = build_time_grid(data);
        const auto curves = random_curves(rng, grid, n);
        std::vector<double> times(n);
        std::vector<int> events(n);
        for (std::size_t i = 0; i < n; ++i) {
            times[i] = data.time(i);
            events[i] = data.event(i);
        }
        const double expected = oracle::ctd_pairs(curves, times, events);
        if (expected < 0.0) {
            CHECK_THROWS_AS(ctd_index(curves, data), std::invalid_argument);
        } else {
            CHECK(ctd_index(curves, data).ctd == expected);
        }
    }
}

TEST_CASE("bootstrap percentile interval basics") {
    ResampleStatistic constant = [](std::span<const std::size_t>) { return 7.5; };
    const auto c = bootstrap_ci(constant, 50, 100, 1);
    CHECK(c.lo == 7.5);
    CHECK(c.hi == 7.5);

    std::mt19937_64 rng(5);
    std::vector<double> sample(1000);
    std::exponential_distribution<double> expo(1.0);
    int contains = 0;
    for (int run = 0; run < 100; ++run) {
        for (auto& v : sample) v = expo(rng);
        ResampleStatistic mean_stat = [&](std::span<const std::size_t> rows) {
            double s = 0.0;
            for (auto r : rows) s += sample[r];
            return s / static_cast<double>(rows.size());
        };
        const auto ci = bootstrap_ci(mean_stat, sample.size(), 100, 1000 + run);
        if (ci.lo <= 1.0 && 1.0 <= ci.hi) ++contains;
        if (run == 0) {
            const auto again = bootstrap_ci(mean_stat, sample.size(), 100, 1000);
            CHECK(again.lo == ci.lo);
            CHECK(again.hi == ci.hi);
        }
    }
    CHECK(contains >= 90);
}

TEST_CASE("ctd bootstrap skips degenerate resamples and brackets the point value") {
    std::mt19937_64 rng(7);
    const auto data = oracle::random_dataset(rng, 40, 1, 0.3);
    const auto curves = random_curves(rng, build_time_grid(data), data.size());
    const auto report = ctd_with_bootstrap(curves, data, 100, 11);
    REQUIRE(report.bootstrap95.has_value());
    CHECK(report.bootstrap95->first <= report.ctd);
    CHECK(report.bootstrap95->second >= report.ctd);
}

TEST_CASE("marginal coverage lands near its target") {
    SyntheticSpec spec;
    spec.n = 1500;
    spec.d = 2;
    spec.beta = Eigen::VectorXd::Zero(2);
    spec.beta[0] = 1.0;
    spec.censoring_rate_target = 0.3;
    spec.seed = 13;
    const auto synth = generate_synthetic(spec);
    const auto parts = split(synth.dataset, {0.4, 0.6}, 1);

    auto fit = std::make_shared<FittedConditionalKM>(
        parts[0], std::make_shared<GaussianEmbeddingKernel>(EmbeddingNet::basic(2)),
        build_time_grid(parts[0]));
    const auto estimator = make_time_estimator(fit);

    const auto at = [&](double alpha, double frac) {
        return marginal_coverage_experiment(estimator, parts[1], alpha, 60, frac, 21);
    };
    const auto a20 = at(0.2, 1.0);
    CHECK(a20.mean_coverage >= 0.78);
    CHECK(a20.mean_coverage <= 0.84);
    const auto a50 = at(0.5, 1.0);
    CHECK(a50.mean_coverage >= 0.47);
    CHECK(a50.mean_coverage <= 0.55);

    // less calibration data biases coverage upward
    const auto small = at(0.2, 0.1);
    CHECK(small.mean_coverage >= a20.mean_coverage - 0.005);

    // a degenerate estimator still covers: the guarantee asks nothing of T-hat
    SurvivalTimeEstimator zero = [](const Eigen::VectorXd&) { return 0.0; };
    std::vector<std::size_t> uncensored;
    for (std::size_t i = 0; i < parts[1].size(); ++i)
        if (parts[1].event(i)) uncensored.push_back(i);
    const auto degenerate =
        marginal_coverage_experiment(zero, parts[1].subset(uncensored), 0.2, 60, 1.0, 33);
    CHECK(degenerate.mean_coverage >= 0.8 - 0.03);
    CHECK(degenerate.mean_coverage <= 0.8 + 0.05);

    // experiments are seed-deterministic end to end
    const auto rerun = at(0.2, 1.0);
    CHECK(rerun.mean_coverage == a20.mean_coverage);
    CHECK(rerun.widths == a20.widths);
}

TEST_CASE("local coverage with a constant kernel mirrors the marginal experiment") {
    SyntheticSpec spec;
    spec.n = 700;
    spec.d = 2;
    spec.beta = Eigen::VectorXd::Zero(2);
    spec.beta[0] = 1.0;
    spec.censoring_rate_target = 0.2;
    spec.seed = 17;
    const auto synth = generate_synthetic(spec);
    const auto parts = split(synth.dataset, {0.4, 0.6}, 2);
    auto fit = std::make_shared<FittedConditionalKM>(
        parts[0], std::make_shared<GaussianEmbeddingKernel>(EmbeddingNet::basic(2)),
        build_time_grid(parts[0]));
    const auto estimator = make_time_estimator(fit);

    ConstantKernel constant;
    const auto local =
        local_coverage_experiment(estimator, constant, parts[1], 0.2, 20, 91);
    const auto marginal =
        marginal_coverage_experiment(estimator, parts[1], 0.2, 20, 1.0, 91);
    CHECK(std::abs(local.mean_coverage - marginal.mean_coverage) <= 0.02);

    // widths shrink pathwise as alpha grows, on the same seed schedule
    GaussianEmbeddingKernel gauss(EmbeddingNet::basic(2));
    const auto tight = local_coverage_experiment(estimator, gauss, parts[1], 0.05, 8, 19);
    const auto loose = local_coverage_experiment(estimator, gauss, parts[1], 0.2, 8, 19);
    REQUIRE(tight.widths.size() == loose.widths.size());
    for (std::size_t k = 0; k < tight.widths.size(); ++k)
        CHECK(tight.widths[k] >= loose.widths[k]);
}

TEST_CASE("local experiment skips centers whose kernel weights all vanish") {
    SyntheticSpec spec;
    spec.n = 120;
    spec.d = 1;
    spec.seed = 23;
    const auto synth = generate_synthetic(spec);
    auto fit = std::make_shared<FittedConditionalKM>(
        synth.dataset, std::make_shared<ConstantKernel>(), build_time_grid(synth.dataset));
    const auto estimator = make_time_estimator(fit);

    // a kernel that vanishes on half the feature space: centers there weight
    // nothing, not even themselves
    struct HalfDeadKernel final : Kernel {
        double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override {
            return (x[0] < 0.0 || xp[0] < 0.0) ? 0.0 : 1.0;
        }
    } half_dead;
    const auto report =
        local_coverage_experiment(estimator, half_dead, synth.dataset, 0.2, 3, 5);
    CHECK(report.redrawn > 0);                  // some centers were skipped
    CHECK(!report.coverages.empty());           // others still produced coverage
    for (double c : report.coverages) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("analytic curves order subjects better than the marginal baseline") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticSpec spec;
        spec.n = 300;
        spec.d = 2;
        spec.beta = Eigen::VectorXd::Zero(2);
        spec.beta[0] = 1.0;
        spec.censoring_rate_target = 0.2;
        spec.seed = 100 + seed;
        const auto synth = generate_synthetic(spec);
        const auto truth = ctd_index(analytic_curves(synth, synth.dataset), synth.dataset);
        const auto km = kaplan_meier(synth.dataset);
        const auto same = ctd_index(
            std::vector<SurvivalCurve>(synth.dataset.size(), km), synth.dataset);
        if (truth.ctd >= same.ctd) ++wins;
    }
    CHECK(wins >= 4);
}

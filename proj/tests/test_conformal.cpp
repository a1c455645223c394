#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksa/conformal.hpp"
#include "oracles.hpp"

#include <limits>
#include <random>

using namespace ksa;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Weights keyed by the first feature; used to stage exact probabilities.
struct KeyedKernel final : Kernel {
    Eigen::VectorXd keys;
    Eigen::VectorXd w;
    double fallback = 0.0;
    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override {
        for (Eigen::Index i = 0; i < keys.size(); ++i)
            if (x[0] == keys[i] || xp[0] == keys[i]) return w[i];
        return fallback;
    }
};
}  // namespace

TEST_CASE("nonconformity score branches") {
    CHECK(nonconformity(10, 1, 7) == 3.0);
    CHECK(nonconformity(10, 0, 12) == 0.0);
    CHECK(nonconformity(10, 0, 7) == 3.0);
    CHECK(nonconformity(7, 1, 10) == 3.0);
    CHECK_THROWS_AS(nonconformity(10, 1, kInf), std::invalid_argument);
}

TEST_CASE("calibrate scores every subject with the estimator") {
    std::mt19937_64 rng(3);
    const auto calib = oracle::random_dataset(rng, 30, 2, 0.4, /*tied_times=*/false);

    // a perfect estimator gives all-zero scores on uncensored rows
    std::vector<std::size_t> uncensored;
    for (std::size_t i = 0; i < calib.size(); ++i)
        if (calib.event(i)) uncensored.push_back(i);
    const auto clean = calib.subset(uncensored);
    std::size_t cursor = 0;
    SurvivalTimeEstimator perfect = [&](const Eigen::VectorXd&) {
        return clean.time(cursor++ % clean.size());
    };
    cursor = 0;
    const auto zero_scores = calibrate(perfect, clean);
    for (double s : zero_scores.scores) CHECK(s == 0.0);

    // all-censored data with estimates above every observed time also scores 0
    SurvivalDataset censored(calib.features(), calib.times(),
                             std::vector<std::uint8_t>(calib.size(), 0));
    SurvivalTimeEstimator high = [&](const Eigen::VectorXd&) {
        return calib.times().maxCoeff() + 1.0;
    };
    for (double s : calibrate(high, censored).scores) CHECK(s == 0.0);

    // pointwise recomputation matches
    SurvivalTimeEstimator norm_est = [](const Eigen::VectorXd& x) { return x.norm(); };
    const auto scores = calibrate(norm_est, calib);
    REQUIRE(scores.scores.size() == calib.size());
    for (std::size_t i = 0; i < calib.size(); ++i) {
        const double expected =
            nonconformity(calib.time(i), calib.event(i), calib.feature_row(i).norm());
        CHECK(scores.scores[i] == expected);
    }
}

TEST_CASE("marginal quantile rank formula") {
    CalibrationScores scores;
    scores.scores = {1, 2, 3, 4};
    CHECK(marginal_quantile(scores, 0.2) == 4.0);
    CHECK(marginal_quantile(scores, 0.01) == kInf);

    CalibrationScores empty;
    CHECK(marginal_quantile(empty, 0.5) == kInf);
    CHECK_THROWS_AS(marginal_quantile(scores, 0.0), std::invalid_argument);

    // a perfect estimator leaves all-zero scores and a zero radius
    CalibrationScores zeros;
    zeros.scores.assign(10, 0.0);
    CHECK(marginal_quantile(zeros, 0.2) == 0.0);
}

TEST_CASE("local quantile hand cases") {
    // probabilities (0.4, 0.3, 0.2) on scores (1, 2, 3) plus 0.1 on +inf
    CalibrationScores scores;
    scores.scores = {1, 2, 3};
    scores.features.resize(3, 1);
    scores.features << 10, 20, 30;
    KeyedKernel kernel;
    kernel.keys.resize(3);
    kernel.keys << 10, 20, 30;
    kernel.w.resize(3);
    kernel.w << 4, 3, 2;
    kernel.fallback = 1.0;  // the query weight
    Eigen::VectorXd x(1), x0(1);
    x << 99, x0 << 77;
    CHECK(local_quantile(scores, kernel, x, x0, 0.2) == 3.0);

    // box kernel: only one calibration point (score 5) and x itself in range
    CalibrationScores five;
    five.scores = {5, 0.1, 0.2};
    five.features.resize(3, 1);
    five.features << 0.0, 100.0, -100.0;
    BoxKernel box(1.0);
    Eigen::VectorXd near(1), center(1);
    near << 0.5, center << 0.0;
    bool degenerate = true;
    CHECK(local_quantile(five, box, near, center, 0.3, 0, &degenerate) == kInf);
    CHECK(!degenerate);

    // all weights zero: degenerate, radius infinite
    Eigen::VectorXd far(1), lonely(1);
    far << 500.0, lonely << 900.0;
    CHECK(local_quantile(five, box, far, lonely, 0.3, 0, &degenerate) == kInf);
    CHECK(degenerate);
}

TEST_CASE("constant kernel makes the local quantile exactly marginal") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ConstantKernel constant;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(unif(rng) * 40.0);
        CalibrationScores scores;
        scores.features.resize(static_cast<Eigen::Index>(n), 1);
        for (std::size_t i = 0; i < n; ++i) {
            scores.scores.push_back(unif(rng) * 10.0);
            scores.features(static_cast<Eigen::Index>(i), 0) = unif(rng);
        }
        const double alpha = 0.01 + 0.98 * unif(rng);
        Eigen::VectorXd x(1), x0(1);
        x << unif(rng), x0 << unif(rng);
        const double lq = local_quantile(scores, constant, x, x0, alpha, trial);
        const double mq = marginal_quantile(scores, alpha, trial);
        CHECK(lq == mq);
    }
}

TEST_CASE("quantile radii are monotone in the target level") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CalibrationScores scores;
    scores.features.resize(20, 1);
    for (int i = 0; i < 20; ++i) {
        scores.scores.push_back(unif(rng) * 5.0);
        scores.features(i, 0) = unif(rng);
    }
    GaussianEmbeddingKernel kernel(EmbeddingNet::basic(1));
    Eigen::VectorXd x(1), x0(1);
    x << 0.3, x0 << 0.4;
    double prev_m = 0.0, prev_l = 0.0;
    for (double level = 0.05; level < 1.0; level += 0.05) {
        const double alpha = 1.0 - level;
        const double mq = marginal_quantile(scores, alpha, 1);
        const double lq = local_quantile(scores, kernel, x, x0, alpha, 1);
        CHECK(mq >= prev_m);
        CHECK(lq >= prev_l);
        prev_m = mq;
        prev_l = lq;
    }
}

TEST_CASE("weighted probabilities normalize to one") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GaussianEmbeddingKernel kernel(EmbeddingNet::basic(2));
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 50 + static_cast<std::size_t>(unif(rng) * 1000.0);
        Eigen::MatrixXd feats(static_cast<Eigen::Index>(n), 2);
        for (Eigen::Index i = 0; i < feats.rows(); ++i)
            feats.row(i) << unif(rng), unif(rng);
        Eigen::VectorXd x(2), x0(2);
        x << unif(rng), unif(rng);
        x0 << unif(rng), unif(rng);
        double total = 0.0, comp = 0.0;
        std::vector<double> weights;
        for (Eigen::Index i = 0; i < feats.rows(); ++i)
            weights.push_back(kernel.evaluate(feats.row(i), x0));
        weights.push_back(kernel.evaluate(x, x0));
        for (double w : weights) {
            const double y = w - comp;
            const double t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        double psum = 0.0, pcomp = 0.0;
        for (double w : weights) {
            const double y = w / total - pcomp;
            const double t = psum + y;
            pcomp = (t - psum) - y;
            psum = t;
        }
        CHECK(std::abs(psum - 1.0) < 1e-12);
    }
}

TEST_CASE("prediction sets clip, invert, and admit everything at infinite radius") {
    const auto a = prediction_set(10, 3);
    CHECK(a.observed_lo == 7.0);
    CHECK(a.observed_hi == 13.0);
    CHECK(a.censored_hi == 13.0);
    CHECK(a.contains(7, 1));
    CHECK(!a.contains(6.9, 1));
    CHECK(a.contains(1, 0));
    CHECK(!a.contains(14, 0));

    const auto clipped = prediction_set(2, 5);
    CHECK(clipped.observed_lo == 0.0);
    CHECK(clipped.observed_hi == 7.0);

    const auto inf_set = prediction_set(4, kInf);
    CHECK(inf_set.contains(0, 1));
    CHECK(inf_set.contains(1e12, 0));
}

#include "ksa/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ksa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Random order among equal values, reproducible from the seed.
std::vector<std::size_t> tie_shuffled_sort(const std::vector<double>& values,
                                           std::uint64_t tie_seed) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(tie_seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}
}  // namespace

double nonconformity(double y, int event, double t_hat) {
    if (!(y >= 0.0)) throw std::invalid_argument("nonconformity: y must be nonnegative");
    if (!std::isfinite(t_hat) || t_hat < 0.0)
        throw std::invalid_argument("nonconformity: estimate must be finite and nonnegative");
    if (event) return std::abs(y - t_hat);
    return std::max(y - t_hat, 0.0);
}

CalibrationScores calibrate(const SurvivalTimeEstimator& estimator,
                            const SurvivalDataset& calib) {
    if (calib.empty()) throw std::invalid_argument("calibrate: empty calibration set");
    CalibrationScores out;
    out.scores.resize(calib.size());
    out.features = calib.features();
    for (std::size_t i = 0; i < calib.size(); ++i)
        out.scores[i] = nonconformity(calib.time(i), calib.event(i),
                                      estimator(calib.feature_row(i)));
    return out;
}

double marginal_quantile(const CalibrationScores& scores, double alpha,
                         std::uint64_t tie_seed) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("marginal_quantile: alpha must be in (0,1)");
    const std::size_t n = scores.scores.size();
    const auto rank = static_cast<std::size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(n + 1)));
    if (rank > n) return kInf;  // the appended +infinity score
    const auto order = tie_shuffled_sort(scores.scores, tie_seed);
    return scores.scores[order[rank - 1]];
}

double local_quantile(const CalibrationScores& scores, const Kernel& kernel,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& x0, double alpha,
                      std::uint64_t tie_seed, bool* degenerate) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("local_quantile: alpha must be in (0,1)");
    if (degenerate) *degenerate = false;

    const std::size_t n = scores.scores.size();
    Eigen::VectorXd w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[static_cast<Eigen::Index>(i)] = kernel.evaluate(scores.features.row(
                                              static_cast<Eigen::Index>(i)), x0);
    const double w_query = kernel.evaluate(x, x0);

    // total weight via compensated summation
    double total = w_query, comp = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double y = w[i] - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if (total <= 0.0) {
        if (degenerate) *degenerate = true;
        return kInf;
    }

    // smallest sorted index whose cumulative weight reaches (1-alpha) * total;
    // the +infinity score (weight w_query) sits past every finite score
    const double threshold = (1.0 - alpha) * total;
    const auto order = tie_shuffled_sort(scores.scores, tie_seed);
    double cum = 0.0;
    comp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double y = w[static_cast<Eigen::Index>(order[k])] - comp;
        const double t = cum + y;
        comp = (t - cum) - y;
        cum = t;
        if (cum >= threshold) return scores.scores[order[k]];
    }
    return kInf;
}

PredictionSet prediction_set(double t_hat, double radius) {
    if (!(t_hat >= 0.0))
        throw std::invalid_argument("prediction_set: center must be nonnegative");
    if (radius < 0.0) throw std::invalid_argument("prediction_set: negative radius");
    PredictionSet set;
    set.center = t_hat;
    set.radius = radius;
    set.observed_lo = std::isinf(radius) ? 0.0 : std::max(t_hat - radius, 0.0);
    set.observed_hi = t_hat + radius;
    set.censored_hi = set.observed_hi;
    return set;
}

}  // namespace ksa

#include "ksa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ksa {

SurvivalDataset::SurvivalDataset(Eigen::MatrixXd features, Eigen::VectorXd times,
                                 std::vector<std::uint8_t> events,
                                 std::vector<std::string> feature_names,
                                 std::optional<Standardization> applied)
    : features_(std::move(features)),
      times_(std::move(times)),
      events_(std::move(events)),
      feature_names_(std::move(feature_names)),
      standardization_(std::move(applied)) {
    const auto n = times_.size();
    if (features_.rows() != n || static_cast<Eigen::Index>(events_.size()) != n)
        throw std::invalid_argument("SurvivalDataset: row counts disagree");
    if (!feature_names_.empty() &&
        static_cast<Eigen::Index>(feature_names_.size()) != features_.cols())
        throw std::invalid_argument("SurvivalDataset: feature name count mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(times_[i] >= 0.0))
            throw std::invalid_argument("SurvivalDataset: negative observed time at row " +
                                        std::to_string(i));
        if (events_[static_cast<std::size_t>(i)] > 1)
            throw std::invalid_argument("SurvivalDataset: event indicator outside {0,1} at row " +
                                        std::to_string(i));
    }
}

double SurvivalDataset::censored_fraction() const {
    if (empty()) return 0.0;
    std::size_t censored = 0;
    for (auto e : events_) censored += (e == 0);
    return static_cast<double>(censored) / static_cast<double>(size());
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> rows) const {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(rows.size()), features_.cols());
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::uint8_t> e(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(rows[k]);
        f.row(static_cast<Eigen::Index>(k)) = features_.row(i);
        t[static_cast<Eigen::Index>(k)] = times_[i];
        e[k] = events_[rows[k]];
    }
    return SurvivalDataset(std::move(f), std::move(t), std::move(e), feature_names_,
                           standardization_);
}

Standardization SurvivalDataset::compute_standardization() const {
    const auto n = static_cast<double>(size());
    Standardization s;
    s.mean = features_.colwise().mean();
    s.scale.resize(features_.cols());
    for (Eigen::Index j = 0; j < features_.cols(); ++j) {
        const double var = (features_.col(j).array() - s.mean[j]).square().sum() / n;
        const double sd = std::sqrt(var);
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

void SurvivalDataset::standardize(const std::optional<Standardization>& stats) {
    const Standardization s = stats ? *stats : compute_standardization();
    if (s.mean.size() != features_.cols() || s.scale.size() != features_.cols())
        throw std::invalid_argument("standardize: statistics dimension mismatch");
    features_.rowwise() -= s.mean.transpose();
    features_.array().rowwise() /= s.scale.transpose().array();
    standardization_ = s;
}

std::size_t TimeGrid::snap_index(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const auto hi = static_cast<std::size_t>(it - times.begin());
    const auto lo = hi - 1;
    // tie goes to the lower grid time
    return (t - times[lo] <= times[hi] - t) ? lo : hi;
}

std::optional<std::size_t> TimeGrid::exact_index(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it != times.end() && *it == t) return static_cast<std::size_t>(it - times.begin());
    return std::nullopt;
}

std::vector<SurvivalDataset> split(const SurvivalDataset& dataset,
                                   const std::vector<double>& fractions,
                                   std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("split: empty dataset");
    if (fractions.empty()) throw std::invalid_argument("split: no fractions");
    double total = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw std::invalid_argument("split: fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");

    const std::size_t n = dataset.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<SurvivalDataset> parts;
    parts.reserve(fractions.size());
    double cum = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        cum += fractions[k];
        std::size_t end = (k + 1 == fractions.size())
                              ? n
                              : static_cast<std::size_t>(std::llround(cum * static_cast<double>(n)));
        end = std::min(end, n);
        if (end < start) end = start;
        parts.push_back(dataset.subset({perm.data() + start, end - start}));
        start = end;
    }
    return parts;
}

TimeGrid build_time_grid(const SurvivalDataset& dataset, std::optional<std::size_t> m) {
    if (dataset.empty()) throw std::invalid_argument("build_time_grid: empty dataset");
    const auto& t = dataset.times();
    const double lo = t.minCoeff();
    const double hi = t.maxCoeff();
    TimeGrid grid;
    if (!m) {
        grid.times.assign(t.data(), t.data() + t.size());
        std::sort(grid.times.begin(), grid.times.end());
        grid.times.erase(std::unique(grid.times.begin(), grid.times.end()), grid.times.end());
        grid.quantized = false;
        return grid;
    }
    if (*m == 0) throw std::invalid_argument("build_time_grid: m must be positive");
    if (*m == 1) {
        if (lo != hi)
            throw std::invalid_argument("build_time_grid: m=1 requires all times equal");
        grid.times = {lo};
        grid.quantized = true;
        return grid;
    }
    grid.times.resize(*m);
    const double step = (hi - lo) / static_cast<double>(*m - 1);
    for (std::size_t k = 0; k < *m; ++k)
        grid.times[k] = lo + step * static_cast<double>(k);
    grid.times.back() = hi;
    // de-duplicate in the degenerate lo == hi case
    grid.times.erase(std::unique(grid.times.begin(), grid.times.end()), grid.times.end());
    grid.quantized = true;
    return grid;
}

SurvivalDataset snap_to_grid(const SurvivalDataset& dataset, const TimeGrid& grid) {
    if (grid.times.empty()) throw std::invalid_argument("snap_to_grid: empty grid");
    const auto& t = dataset.times();
    if (!dataset.empty() &&
        (grid.times.front() > t.minCoeff() || grid.times.back() < t.maxCoeff()))
        throw std::invalid_argument("snap_to_grid: grid does not cover observed times");
    Eigen::VectorXd snapped(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i)
        snapped[i] = grid.times[grid.snap_index(t[i])];
    return SurvivalDataset(dataset.features(), std::move(snapped), dataset.events(),
                           dataset.feature_names(), dataset.standardization());
}

}  // namespace ksa

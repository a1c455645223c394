#include "ksa/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ksa {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLocalCenters = 100;
constexpr int kLocalDraws = 100;

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: no values");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct PointEstimates {
    std::vector<double> t_hat;
    std::vector<double> score;
};

PointEstimates precompute(const SurvivalTimeEstimator& estimator,
                          const SurvivalDataset& test) {
    PointEstimates pe;
    pe.t_hat.resize(test.size());
    pe.score.resize(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        pe.t_hat[i] = estimator(test.feature_row(i));
        pe.score[i] = nonconformity(test.time(i), test.event(i), pe.t_hat[i]);
    }
    return pe;
}

void summarize(CoverageReport& report, bool local_widths) {
    double sum = 0.0;
    for (double c : report.coverages) sum += c;
    report.mean_coverage =
        report.coverages.empty() ? 0.0 : sum / static_cast<double>(report.coverages.size());
    report.std_coverage = sample_std(report.coverages, report.mean_coverage);
    if (report.widths.empty()) return;
    if (local_widths) {
        report.width_median = percentile(report.widths, 50.0);
        const double q1 = percentile(report.widths, 25.0);
        const double q3 = percentile(report.widths, 75.0);
        report.width_quartile_dev = 0.5 * (q3 - q1);
    } else {
        double wsum = 0.0;
        for (double w : report.widths) wsum += w;
        report.width_mean = wsum / static_cast<double>(report.widths.size());
        report.width_std = sample_std(report.widths, report.width_mean);
        report.width_median = percentile(report.widths, 50.0);
        const double q1 = percentile(report.widths, 25.0);
        const double q3 = percentile(report.widths, 75.0);
        report.width_quartile_dev = 0.5 * (q3 - q1);
    }
}

}  // namespace

ConcordanceReport ctd_index(const std::vector<SurvivalCurve>& curves,
                            const SurvivalDataset& test) {
    if (curves.size() != test.size())
        throw std::invalid_argument("ctd_index: one curve per test subject required");
    double concordant = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (!test.event(i)) continue;
        const double yi = test.time(i);
        const double s_own = curves[i].value_at(yi);
        for (std::size_t j = 0; j < test.size(); ++j) {
            if (j == i || !(yi < test.time(j))) continue;
            ++pairs;
            const double s_other = curves[j].value_at(yi);
            if (s_own < s_other)
                concordant += 1.0;
            else if (s_own == s_other)
                concordant += 0.5;
        }
    }
    if (pairs == 0) throw std::invalid_argument("ctd_index: no comparable pairs");
    ConcordanceReport report;
    report.ctd = concordant / static_cast<double>(pairs);
    report.comparable_pairs = pairs;
    return report;
}

ConcordanceReport ctd_with_bootstrap(const std::vector<SurvivalCurve>& curves,
                                     const SurvivalDataset& test, int reps,
                                     std::uint64_t seed) {
    ConcordanceReport report = ctd_index(curves, test);
    const auto stat = [&](std::span<const std::size_t> rows) -> std::optional<double> {
        std::vector<SurvivalCurve> sub_curves;
        sub_curves.reserve(rows.size());
        for (auto r : rows) sub_curves.push_back(curves[r]);
        const SurvivalDataset sub = test.subset(rows);
        try {
            return ctd_index(sub_curves, sub).ctd;
        } catch (const std::invalid_argument&) {
            return std::nullopt;  // no comparable pairs in this resample
        }
    };
    const auto ci = bootstrap_ci(stat, test.size(), reps, seed);
    report.bootstrap95 = {ci.lo, ci.hi};
    return report;
}

BootstrapResult bootstrap_ci(const ResampleStatistic& statistic, std::size_t n, int reps,
                             std::uint64_t seed) {
    if (reps < 2) throw std::invalid_argument("bootstrap_ci: need at least 2 repetitions");
    if (n == 0) throw std::invalid_argument("bootstrap_ci: empty data");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(reps));
    BootstrapResult out;
    std::vector<std::size_t> rows(n);
    for (int r = 0; r < reps; ++r) {
        for (auto& row : rows) row = pick(rng);
        const auto v = statistic(rows);
        if (v)
            values.push_back(*v);
        else
            ++out.skipped;
    }
    if (values.empty()) throw std::runtime_error("bootstrap_ci: statistic undefined everywhere");
    out.used_reps = static_cast<int>(values.size());
    out.lo = percentile(values, 2.5);
    out.hi = percentile(values, 97.5);
    return out;
}

CoverageReport marginal_coverage_experiment(const SurvivalTimeEstimator& estimator,
                                            const SurvivalDataset& test, double alpha,
                                            int reps, double calib_fraction,
                                            std::uint64_t seed) {
    if (test.empty()) throw std::invalid_argument("coverage experiment: empty test set");
    if (!(calib_fraction > 0.0 && calib_fraction <= 1.0))
        throw std::invalid_argument("coverage experiment: calib_fraction must be in (0,1]");
    const PointEstimates pe = precompute(estimator, test);
    const std::size_t n = test.size();

    CoverageReport report;
    report.target = 1.0 - alpha;
    std::uint64_t cursor = seed;
    for (int r = 0; r < reps; ++r) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::size_t n_cal = 0, n_proper = 0;
        std::mt19937_64 rng;
        while (true) {
            rng.seed(cursor++);
            std::shuffle(perm.begin(), perm.end(), rng);
            n_cal = static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(n)));
            n_proper = n - n_cal;
            if (n_proper >= 2 && n_cal >= 1) break;
            ++report.redrawn;
            if (report.redrawn > reps + 100)
                throw std::runtime_error("coverage experiment: test set too small");
        }
        const auto n_sub = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(calib_fraction * static_cast<double>(n_cal))));

        CalibrationScores scores;
        scores.scores.reserve(n_sub);
        for (std::size_t k = 0; k < n_sub; ++k) scores.scores.push_back(pe.score[perm[k]]);
        const double q_hat = marginal_quantile(scores, alpha, rng());

        std::size_t covered = 0;
        for (std::size_t k = n_cal; k < n; ++k) {
            const auto row = perm[k];
            const auto set = prediction_set(pe.t_hat[row], q_hat);
            covered += set.contains(test.time(row), test.event(row));
        }
        report.coverages.push_back(static_cast<double>(covered) /
                                   static_cast<double>(n_proper));
        report.rep_index.push_back(r);
        report.widths.push_back(2.0 * q_hat);
        report.rep_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    }
    summarize(report, /*local_widths=*/false);
    return report;
}

CoverageReport local_coverage_experiment(const SurvivalTimeEstimator& estimator,
                                         const Kernel& kernel, const SurvivalDataset& test,
                                         double alpha, int reps, std::uint64_t seed) {
    if (test.empty()) throw std::invalid_argument("coverage experiment: empty test set");
    const PointEstimates pe = precompute(estimator, test);
    const std::size_t n = test.size();
    const auto prepared = kernel.prepare(test.features());

    CoverageReport report;
    report.target = 1.0 - alpha;
    std::uint64_t cursor = seed;
    for (int r = 0; r < reps; ++r) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::size_t n_cal = 0, n_proper = 0;
        std::mt19937_64 rng;
        while (true) {
            rng.seed(cursor++);
            std::shuffle(perm.begin(), perm.end(), rng);
            n_cal = static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(n)));
            n_proper = n - n_cal;
            if (n_proper >= 2 && n_cal >= 1) break;
            ++report.redrawn;
            if (report.redrawn > reps + 100)
                throw std::runtime_error("coverage experiment: test set too small");
        }
        const std::span<const std::size_t> calib_rows(perm.data(), n_cal);
        const std::span<const std::size_t> proper_rows(perm.data() + n_cal, n_proper);

        // calibration scores in one seeded tie-shuffled order for the whole
        // repetition (tie order never changes the selected value)
        std::vector<double> cal_scores(n_cal);
        for (std::size_t k = 0; k < n_cal; ++k) cal_scores[k] = pe.score[calib_rows[k]];
        std::vector<std::size_t> sorted(n_cal);
        std::iota(sorted.begin(), sorted.end(), std::size_t{0});
        std::shuffle(sorted.begin(), sorted.end(), rng);
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return cal_scores[a] < cal_scores[b];
        });

        for (int c = 0; c < kLocalCenters; ++c) {
            const std::size_t center_row =
                proper_rows[std::uniform_int_distribution<std::size_t>(0, n_proper - 1)(rng)];
            const Eigen::VectorXd w_all = prepared->weights(test.feature_row(center_row));

            // cumulative calibration weight in sorted-score order
            std::vector<double> cum(n_cal);
            double run = 0.0, comp = 0.0;
            for (std::size_t k = 0; k < n_cal; ++k) {
                const double w = w_all[static_cast<Eigen::Index>(calib_rows[sorted[k]])];
                const double y = w - comp;
                const double t = run + y;
                comp = (t - run) - y;
                run = t;
                cum[k] = run;
            }
            const double w_cal_total = n_cal > 0 ? cum.back() : 0.0;

            std::vector<double> proper_w(n_proper);
            double proper_total = 0.0;
            for (std::size_t k = 0; k < n_proper; ++k) {
                proper_w[k] = w_all[static_cast<Eigen::Index>(proper_rows[k])];
                proper_total += proper_w[k];
            }
            if (proper_total <= 0.0) {
                ++report.redrawn;  // center with all-zero kernel weights: skipped
                continue;
            }
            std::discrete_distribution<std::size_t> draw(proper_w.begin(), proper_w.end());

            int covered = 0;
            for (int dI = 0; dI < kLocalDraws; ++dI) {
                const std::size_t k = draw(rng);
                const std::size_t row = proper_rows[k];
                const double w_query = proper_w[k];
                const double threshold = (1.0 - alpha) * (w_cal_total + w_query);
                const auto it = std::lower_bound(cum.begin(), cum.end(), threshold);
                const double q_hat =
                    it == cum.end()
                        ? kInf
                        : cal_scores[sorted[static_cast<std::size_t>(it - cum.begin())]];
                const auto set = prediction_set(pe.t_hat[row], q_hat);
                covered += set.contains(test.time(row), test.event(row));
                report.widths.push_back(2.0 * q_hat);
            }
            report.coverages.push_back(static_cast<double>(covered) /
                                       static_cast<double>(kLocalDraws));
            report.rep_index.push_back(r);
            report.center_rows.push_back(static_cast<int>(center_row));
        }
        report.rep_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    }
    summarize(report, /*local_widths=*/true);
    return report;
}

}  // namespace ksa

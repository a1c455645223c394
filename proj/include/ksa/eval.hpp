#pragma once

#include "ksa/conformal.hpp"
#include "ksa/dataset.hpp"
#include "ksa/estimator.hpp"
#include "ksa/kernel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ksa {

struct ConcordanceReport {
    double ctd = 0.0;
    std::size_t comparable_pairs = 0;
    std::optional<std::pair<double, double>> bootstrap95;
};

/// Antolini's time-dependent concordance: over pairs with Y_i < Y_j and the
/// earlier subject's death observed, the fraction where the predicted
/// survival at Y_i orders the subjects correctly (ties count one half).
ConcordanceReport ctd_index(const std::vector<SurvivalCurve>& curves,
                            const SurvivalDataset& test);

/// Same, with a 95% bootstrap confidence interval over test resamples.
ConcordanceReport ctd_with_bootstrap(const std::vector<SurvivalCurve>& curves,
                                     const SurvivalDataset& test, int reps,
                                     std::uint64_t seed);

/// A statistic evaluated on a with-replacement resample given by row
/// indices; nullopt marks the statistic undefined on that resample.
using ResampleStatistic =
    std::function<std::optional<double>(std::span<const std::size_t>)>;

struct BootstrapResult {
    double lo = 0.0;
    double hi = 0.0;
    int used_reps = 0;
    int skipped = 0;
};

/// Percentile bootstrap (2.5/97.5) over `reps` resamples of n rows.
/// Undefined resamples are skipped and counted.
BootstrapResult bootstrap_ci(const ResampleStatistic& statistic, std::size_t n, int reps,
                             std::uint64_t seed);

struct CoverageReport {
    double target = 0.0;                 // 1 - alpha
    std::vector<double> coverages;       // per repetition (marginal) or per center (local)
    std::vector<int> rep_index;          // repetition each coverage entry came from
    std::vector<int> center_rows;        // test row of each local center (local only)
    double mean_coverage = 0.0;
    double std_coverage = 0.0;
    std::vector<double> widths;          // 2 q-hat per repetition / per checked point
    double width_mean = 0.0;             // marginal summary
    double width_std = 0.0;
    double width_median = 0.0;           // local summary
    double width_quartile_dev = 0.0;     // half the interquartile range
    int redrawn = 0;                     // repetitions redrawn / centers skipped
    std::vector<double> rep_seconds;     // wall-clock per repetition (informational)
};

/// Marginal protocol: per repetition, split the test set 50/50 into
/// calibration and proper halves, optionally subsample the calibration half,
/// compute the split conformal radius and record the fraction of proper
/// points whose label lands in its prediction set.
CoverageReport marginal_coverage_experiment(const SurvivalTimeEstimator& estimator,
                                            const SurvivalDataset& test, double alpha,
                                            int reps, double calib_fraction,
                                            std::uint64_t seed);

/// Local protocol: per repetition, split 50/50; draw 100 centers uniformly
/// with replacement from the proper half; per center draw 100 proper points
/// with probability proportional to K(., x0) and record per-center coverage
/// of the weighted conformal sets and every radius.
CoverageReport local_coverage_experiment(const SurvivalTimeEstimator& estimator,
                                         const Kernel& kernel, const SurvivalDataset& test,
                                         double alpha, int reps, std::uint64_t seed);

}  // namespace ksa

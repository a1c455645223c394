#pragma once

#include "ksa/dataset.hpp"
#include "ksa/estimator.hpp"
#include "ksa/kernel.hpp"

#include <cstdint>
#include <vector>

namespace ksa {

/// Nonconformity scores of a calibration set, with the calibration feature
/// vectors retained for kernel weighting. The +infinity score of the query
/// point is appended at quantile time, not stored here.
struct CalibrationScores {
    std::vector<double> scores;
    Eigen::MatrixXd features;  // one row per calibration subject
};

/// Prediction error of a survival-time estimate against a possibly censored
/// label: |y - t_hat| when the death was observed, max(y - t_hat, 0) when
/// censored (a censoring time below the estimate costs nothing).
double nonconformity(double y, int event, double t_hat);

/// Score every calibration subject with the trained estimator. The
/// estimator must have been trained on data disjoint from `calib`.
CalibrationScores calibrate(const SurvivalTimeEstimator& estimator,
                            const SurvivalDataset& calib);

/// Split conformal radius: the order statistic of the scores (plus an
/// appended +infinity) at rank ceil((1-alpha)(n+1)). Ties are put in a
/// seeded random order before the stable sort.
double marginal_quantile(const CalibrationScores& scores, double alpha,
                         std::uint64_t tie_seed = 0);

/// Weighted split conformal radius local to x0: calibration score i carries
/// weight K(X'_i, x0), the appended +infinity carries K(x, x0), and the
/// radius is the smallest sorted score whose cumulative probability reaches
/// 1-alpha (compensated summation). Returns +infinity and sets `degenerate`
/// when every weight is zero.
double local_quantile(const CalibrationScores& scores, const Kernel& kernel,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& x0, double alpha,
                      std::uint64_t tie_seed = 0, bool* degenerate = nullptr);

/// The pair of intervals around a survival-time estimate: symmetric (clipped
/// at 0) for uncensored labels, [0, center + radius] for censored ones.
struct PredictionSet {
    double center = 0.0;
    double radius = 0.0;  // may be +infinity
    double observed_lo = 0.0;
    double observed_hi = 0.0;
    double censored_hi = 0.0;

    bool contains(double y, int event) const {
        if (event) return y >= observed_lo && y <= observed_hi;
        return y >= 0.0 && y <= censored_hi;
    }
};

PredictionSet prediction_set(double t_hat, double radius);

}  // namespace ksa

#pragma once

#include "ksa/dataset.hpp"
#include "ksa/kernel.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace ksa {

/// Right-continuous piecewise-constant survival curve on a time grid, with
/// S(t) = 1 for t below the first grid time.
struct SurvivalCurve {
    TimeGrid grid;
    std::vector<double> values;  // values[l] = S(grid.times[l]), non-increasing in [0,1]

    /// Step lookup: 1 before the first grid time, then the value at the
    /// largest grid time <= t.
    double value_at(double t) const;
};

/// Product-limit Kaplan-Meier estimate of the marginal survival function on
/// the grid of unique observed times.
SurvivalCurve kaplan_meier(const SurvivalDataset& dataset);

/// Beran's conditional Kaplan-Meier estimator: Kaplan-Meier with every
/// subject's contribution weighted by kernel similarity to the query point.
/// A tiny epsilon guards the weighted at-risk denominator.
class FittedConditionalKM {
public:
    FittedConditionalKM(SurvivalDataset train, std::shared_ptr<const Kernel> kernel,
                        TimeGrid grid, double epsilon = 1e-12);

    const SurvivalDataset& train() const { return train_; }
    const TimeGrid& grid() const { return grid_; }
    const Kernel& kernel() const { return *kernel_; }
    double epsilon() const { return epsilon_; }

    /// S_K(. | x) over the fit's grid.
    SurvivalCurve predict(const Eigen::VectorXd& x) const;

    /// Discrete kernel hazard d_K(t_l|x) / (n_K(t_l|x) + eps) for every grid
    /// time; `exclude` drops one training subject from the weighted counts
    /// (the leave-one-out form used by the training loss).
    std::vector<double> hazard(const Eigen::VectorXd& x,
                               std::optional<std::size_t> exclude = std::nullopt) const;

private:
    std::vector<double> hazard_from_weights(Eigen::VectorXd weights) const;

    SurvivalDataset train_;
    std::shared_ptr<const Kernel> kernel_;
    std::unique_ptr<const PreparedKernel> prepared_;
    TimeGrid grid_;
    double epsilon_;
    std::vector<std::size_t> order_;  // train indices sorted by observed time
};

/// Median survival time: the average of the first time the curve is <= 1/2
/// and the last time it is >= 1/2, on the extended step curve. +infinity when
/// the curve never reaches 1/2.
double median_survival_time(const SurvivalCurve& curve);

/// Exact integral of the step curve over [0, horizon]; requires
/// horizon >= the last grid time.
double mean_survival_time(const SurvivalCurve& curve, double horizon);

/// A survival-time predictor x -> T(x).
using SurvivalTimeEstimator = std::function<double(const Eigen::VectorXd&)>;

enum class TimeEstimate { Median, Mean };

/// Wrap a fitted conditional Kaplan-Meier model as a survival-time
/// estimator. Median estimates of +infinity (curve never crossing 1/2) are
/// replaced by the last grid time so downstream scoring stays finite; the
/// mean estimator integrates up to `horizon` (default: last grid time).
SurvivalTimeEstimator make_time_estimator(std::shared_ptr<const FittedConditionalKM> fit,
                                          TimeEstimate type = TimeEstimate::Median,
                                          std::optional<double> horizon = std::nullopt);

}  // namespace ksa

#pragma once

#include "ksa/dataset.hpp"

#include <cstdint>
#include <functional>

namespace ksa {

/// Data-generating models with known conditional survival functions.
enum class HazardModel {
    /// T exponential with rate exp(beta . x); X ~ N(0, I).
    ExponentialRate,
    /// Two Gaussian clusters on the first axis; cluster id sets the Weibull
    /// scale of T. Gives a known kernel structure for local-coverage tests.
    TwoClusterWeibull,
};

struct SyntheticSpec {
    std::size_t n = 1000;
    std::size_t d = 1;
    HazardModel hazard_model = HazardModel::ExponentialRate;
    /// Target fraction of censored subjects; the censoring rate is tuned by
    /// bisection until the realized fraction is within 0.05 of this. 0 means
    /// no censoring at all.
    double censoring_rate_target = 0.0;
    std::uint64_t seed = 0;

    // ExponentialRate parameters; empty beta defaults to (1, 0, ..., 0).
    Eigen::VectorXd beta;

    // TwoClusterWeibull parameters.
    double cluster_separation = 4.0;
    double cluster_noise = 0.5;
    double weibull_shape = 1.5;
    double weibull_scale0 = 2.0;
    double weibull_scale1 = 8.0;
};

struct SyntheticData {
    SurvivalDataset dataset;
    /// Analytic S(t|x) of the generating model.
    std::function<double(double, const Eigen::VectorXd&)> survival;
    /// Censoring rate the tuner settled on (0 when no censoring).
    double censoring_rate = 0.0;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace ksa

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ksa {

/// One subject: feature vector, observed time, event indicator
/// (1 = death observed, 0 = censored).
struct Subject {
    Eigen::VectorXd features;
    double observed_time = 0.0;
    int event = 0;
};

/// Per-feature (mean, scale) used to standardize columns at ingestion.
/// Constant columns get scale 1 so they standardize to all zeros.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

/// Right-censored survival data. Rows are immutable after construction;
/// features are stored row-per-subject.
class SurvivalDataset {
public:
    SurvivalDataset() = default;
    SurvivalDataset(Eigen::MatrixXd features, Eigen::VectorXd times,
                    std::vector<std::uint8_t> events,
                    std::vector<std::string> feature_names = {},
                    std::optional<Standardization> applied = std::nullopt);

    std::size_t size() const { return static_cast<std::size_t>(times_.size()); }
    bool empty() const { return size() == 0; }
    Eigen::Index feature_dim() const { return features_.cols(); }

    const Eigen::MatrixXd& features() const { return features_; }
    Eigen::VectorXd feature_row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }
    const Eigen::VectorXd& times() const { return times_; }
    double time(std::size_t i) const { return times_[static_cast<Eigen::Index>(i)]; }
    int event(std::size_t i) const { return events_[i]; }
    const std::vector<std::uint8_t>& events() const { return events_; }
    Subject subject(std::size_t i) const { return {feature_row(i), time(i), event(i)}; }

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::optional<Standardization>& standardization() const { return standardization_; }

    /// Fraction of subjects with event == 0.
    double censored_fraction() const;

    /// New dataset holding the given rows, in the given order.
    SurvivalDataset subset(std::span<const std::size_t> rows) const;

    /// Standardize feature columns in place using the given statistics
    /// (or statistics computed from this dataset when absent), and record them.
    void standardize(const std::optional<Standardization>& stats = std::nullopt);

    /// Statistics of this dataset's feature columns (mean, population std;
    /// constant columns get scale 1).
    Standardization compute_standardization() const;

private:
    Eigen::MatrixXd features_;
    Eigen::VectorXd times_;
    std::vector<std::uint8_t> events_;
    std::vector<std::string> feature_names_;
    std::optional<Standardization> standardization_;
};

/// Grid of strictly increasing nonnegative times. Unquantized grids are
/// the sorted unique observed times of the source dataset; quantized grids
/// are evenly spaced between the min and max observed time.
struct TimeGrid {
    std::vector<double> times;
    bool quantized = false;

    std::size_t size() const { return times.size(); }

    /// Index of the grid time nearest to t; ties go to the lower grid time.
    std::size_t snap_index(double t) const;

    /// Index of the grid time equal to t, or nullopt.
    std::optional<std::size_t> exact_index(double t) const;
};

/// Seeded uniform random partition. Part sizes follow cumulative rounding
/// so totals are exact; same seed gives the identical split.
std::vector<SurvivalDataset> split(const SurvivalDataset& dataset,
                                   const std::vector<double>& fractions,
                                   std::uint64_t seed);

/// Unique observed times when m is absent; m evenly spaced points from the
/// min to the max observed time otherwise.
TimeGrid build_time_grid(const SurvivalDataset& dataset,
                         std::optional<std::size_t> m = std::nullopt);

/// Replace every observed time by the nearest grid time (ties downward).
SurvivalDataset snap_to_grid(const SurvivalDataset& dataset, const TimeGrid& grid);

}  // namespace ksa

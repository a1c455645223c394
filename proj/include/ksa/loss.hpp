#pragma once

#include "ksa/dataset.hpp"
#include "ksa/embedding_net.hpp"

#include <Eigen/Core>
#include <vector>

namespace ksa {

/// Hazard clamp applied before logarithms: the likelihood is undefined at
/// h in {0, 1}, which happens whenever a batch subject holds the earliest
/// unique time. Clamped terms contribute no gradient.
constexpr double kHazardClamp = 1e-7;

/// Epsilon guard on the weighted at-risk denominator.
constexpr double kRiskEpsilon = 1e-12;

struct LossReport {
    double value = 0.0;                 // mean negative log-likelihood, >= 0
    std::vector<double> batch_values;   // per-batch values (one entry here)
    double gradient_norm = 0.0;
};

/// Mean negative survival log-likelihood of the leave-one-out kernel hazard
/// over one mini-batch. Every subject's hazard is estimated from the other
/// batch subjects only; the time sum runs over the full training grid. All
/// batch observed times must lie on the grid and the batch must have at
/// least two subjects.
LossReport survival_loss(const EmbeddingNet& net, const SurvivalDataset& batch,
                         const TimeGrid& grid);

/// Gradient of survival_loss with respect to the net's flat parameter
/// vector (training-mode batch statistics).
Eigen::VectorXd loss_gradient(const EmbeddingNet& net, const SurvivalDataset& batch,
                              const TimeGrid& grid);

/// One pass computing both; `update_net_stats` additionally folds the batch
/// normalization statistics into the net's running averages.
struct LossAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};
LossAndGradient survival_loss_with_gradient(EmbeddingNet& net, const SurvivalDataset& batch,
                                            const TimeGrid& grid,
                                            bool update_net_stats = false);

}  // namespace ksa

#pragma once

#include "ksa/dataset.hpp"
#include "ksa/embedding_net.hpp"
#include "ksa/loss.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ksa {

struct TrainConfig {
    int epochs = 20;
    int batch_size = 64;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    /// Quantized time-grid size; unset means all unique observed times.
    std::optional<std::size_t> grid_points;
};

struct TrainResult {
    EmbeddingNet net;
    std::vector<double> epoch_losses;  // batch-size weighted mean per epoch
    TimeGrid grid;
};

/// Mini-batch Adam on the kernel survival loss. Batches come from a seeded
/// shuffle each epoch; a final incomplete batch is kept when it still has
/// two subjects (the leave-one-out hazard needs a neighbor) and dropped
/// otherwise. Same seed and config reproduce the identical run.
TrainResult train(EmbeddingNet net, const SurvivalDataset& train_data,
                  const TrainConfig& config);

struct WarmStartResult {
    EmbeddingNet net;
    std::vector<double> epoch_mse;
};

/// Fit the net to embedding targets by minimizing the mean squared error
/// (1/n) sum ||psi(x_i) - target_i||^2 with mini-batch Adam. Used to
/// initialize from an MDS embedding of an external kernel matrix before
/// likelihood fine-tuning.
WarmStartResult warm_start(EmbeddingNet net, const SurvivalDataset& train_data,
                           const std::vector<Eigen::VectorXd>& targets,
                           const TrainConfig& config);

/// Adam state for one parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(Eigen::Index size, double lr, double beta1, double beta2, double eps);
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    Eigen::VectorXd m_, v_;
};

}  // namespace ksa

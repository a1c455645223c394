#include "ksa/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ksa {

AdamOptimizer::AdamOptimizer(Eigen::Index size, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params -= (lr_ / bc1) * m_.cwiseQuotient(((v_ / bc2).cwiseSqrt().array() + eps_).matrix());
}

namespace {

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(start + batch_size, n);
        if (end - start < 2) break;  // leave-one-out needs a neighbor
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace

TrainResult train(EmbeddingNet net, const SurvivalDataset& train_data,
                  const TrainConfig& config) {
    if (train_data.empty()) throw std::invalid_argument("train: empty dataset");
    if (config.epochs < 0 || config.batch_size < 2)
        throw std::invalid_argument("train: invalid config");

    TrainResult result;
    result.grid = build_time_grid(train_data, config.grid_points);
    const SurvivalDataset data = result.grid.quantized
                                     ? snap_to_grid(train_data, result.grid)
                                     : train_data;

    const std::size_t n = data.size();
    const std::size_t batch_size = std::min<std::size_t>(
        static_cast<std::size_t>(config.batch_size), n);

    AdamOptimizer adam(net.parameter_count(), config.learning_rate, config.adam_beta1,
                       config.adam_beta2, config.adam_eps);
    std::mt19937_64 rng(config.seed);
    Eigen::VectorXd params = net.parameters();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(n, batch_size, rng);
        double loss_sum = 0.0;
        std::size_t count = 0;
        for (const auto& rows : batches) {
            const SurvivalDataset batch = data.subset(rows);
            const auto lg =
                survival_loss_with_gradient(net, batch, result.grid, /*update_net_stats=*/true);
            adam.step(params, lg.gradient);
            net.set_parameters(params);
            loss_sum += lg.value * static_cast<double>(rows.size());
            count += rows.size();
        }
        result.epoch_losses.push_back(count > 0 ? loss_sum / static_cast<double>(count) : 0.0);
    }
    result.net = std::move(net);
    return result;
}

WarmStartResult warm_start(EmbeddingNet net, const SurvivalDataset& train_data,
                           const std::vector<Eigen::VectorXd>& targets,
                           const TrainConfig& config) {
    const std::size_t n = train_data.size();
    if (targets.size() != n)
        throw std::invalid_argument("warm_start: one target per training subject required");
    for (const auto& t : targets)
        if (t.size() != net.output_dim())
            throw std::invalid_argument("warm_start: target dimension mismatch");

    Eigen::MatrixXd target_mat(static_cast<Eigen::Index>(n), net.output_dim());
    for (std::size_t i = 0; i < n; ++i)
        target_mat.row(static_cast<Eigen::Index>(i)) = targets[i].transpose();

    const std::size_t batch_size =
        std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
    AdamOptimizer adam(net.parameter_count(), config.learning_rate, config.adam_beta1,
                       config.adam_beta2, config.adam_eps);
    std::mt19937_64 rng(config.seed);
    Eigen::VectorXd params = net.parameters();

    WarmStartResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(n, batch_size, rng);
        double mse_sum = 0.0;
        std::size_t count = 0;
        for (const auto& rows : batches) {
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), net.input_dim());
            Eigen::MatrixXd T(static_cast<Eigen::Index>(rows.size()), net.output_dim());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                X.row(static_cast<Eigen::Index>(k)) =
                    train_data.features().row(static_cast<Eigen::Index>(rows[k]));
                T.row(static_cast<Eigen::Index>(k)) =
                    target_mat.row(static_cast<Eigen::Index>(rows[k]));
            }
            ForwardCache cache;
            const Eigen::MatrixXd Z = net.forward_batch(X, /*train_mode=*/true, &cache);
            net.update_running_stats(cache);
            const Eigen::MatrixXd diff = Z - T;
            const double mse = diff.squaredNorm() / static_cast<double>(rows.size());
            const Eigen::MatrixXd dZ = (2.0 / static_cast<double>(rows.size())) * diff;
            const Eigen::VectorXd grad = net.backward(cache, dZ);
            adam.step(params, grad);
            net.set_parameters(params);
            mse_sum += mse * static_cast<double>(rows.size());
            count += rows.size();
        }
        result.epoch_mse.push_back(count > 0 ? mse_sum / static_cast<double>(count) : 0.0);
    }
    result.net = std::move(net);
    return result;
}

}  // namespace ksa

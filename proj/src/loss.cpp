#include "ksa/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace ksa {
namespace {

struct BatchIndex {
    std::vector<std::size_t> grid_of;  // grid index of each batch subject's time
};

BatchIndex index_batch(const SurvivalDataset& batch, const TimeGrid& grid) {
    if (batch.size() < 2)
        throw std::invalid_argument("survival_loss: batch needs at least 2 subjects");
    BatchIndex idx;
    idx.grid_of.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto g = grid.exact_index(batch.time(i));
        if (!g)
            throw std::invalid_argument("survival_loss: observed time off the grid at row " +
                                        std::to_string(i));
        idx.grid_of[i] = *g;
    }
    return idx;
}

}  // namespace

LossAndGradient survival_loss_with_gradient(EmbeddingNet& net, const SurvivalDataset& batch,
                                            const TimeGrid& grid, bool update_net_stats) {
    const auto idx = index_batch(batch, grid);
    const auto b = static_cast<Eigen::Index>(batch.size());
    const auto m = grid.size();
    const double inv_b = 1.0 / static_cast<double>(b);

    ForwardCache cache;
    const Eigen::MatrixXd Z = net.forward_batch(batch.features(), /*train_mode=*/true, &cache);
    if (update_net_stats) net.update_running_stats(cache);

    // pairwise kernel, diagonal zeroed (leave-one-out drops self terms)
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(b, b);
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = i + 1; j < b; ++j)
            K(i, j) = K(j, i) = std::exp(-(Z.row(i) - Z.row(j)).squaredNorm());

    // per subject: hazards on every grid time up to its own, then the three
    // families of the discrete-time survival likelihood
    double loss = 0.0;
    Eigen::MatrixXd dL_dK = Eigen::MatrixXd::Zero(b, b);

    std::vector<double> death_at(m), weight_at(m), den(m), num(m), dl_dh(m), cum_b(m);
    for (Eigen::Index i = 0; i < b; ++i) {
        const std::size_t gi = idx.grid_of[static_cast<std::size_t>(i)];
        std::fill(death_at.begin(), death_at.begin() + gi + 1, 0.0);
        std::fill(weight_at.begin(), weight_at.begin() + gi + 1, 0.0);
        double beyond = 0.0;  // total weight with grid index > gi
        for (Eigen::Index j = 0; j < b; ++j) {
            if (j == i) continue;
            const std::size_t gj = idx.grid_of[static_cast<std::size_t>(j)];
            const double k = K(i, j);
            if (gj > gi) {
                beyond += k;
                continue;
            }
            weight_at[gj] += k;
            if (batch.event(static_cast<std::size_t>(j))) death_at[gj] += k;
        }
        // den[l] = sum of weights with Y_j >= t_l, for l <= gi
        double suffix = beyond;
        for (std::size_t l = gi + 1; l-- > 0;) {
            suffix += weight_at[l];
            den[l] = suffix;
            num[l] = death_at[l];
        }

        const int ev = batch.event(static_cast<std::size_t>(i));
        for (std::size_t l = 0; l <= gi; ++l) {
            const double h_raw = num[l] / (den[l] + kRiskEpsilon);
            const bool clamped = h_raw < kHazardClamp || h_raw > 1.0 - kHazardClamp;
            const double h = std::min(std::max(h_raw, kHazardClamp), 1.0 - kHazardClamp);
            double dldh = 0.0;
            if (l == gi) {
                loss -= inv_b * (ev ? std::log(h) : std::log1p(-h));
                if (!clamped)
                    dldh = ev ? -inv_b / h : inv_b / (1.0 - h);
            } else {
                loss -= inv_b * std::log1p(-h);
                if (!clamped) dldh = inv_b / (1.0 - h);
            }
            dl_dh[l] = dldh;
        }

        // dL/dK(i,j) = delta_j * A[g_j] - cumB[min(g_j, g_i)] with
        // A[l] = dldh/(den+eps), B[l] = dldh*num/(den+eps)^2
        double run = 0.0;
        for (std::size_t l = 0; l <= gi; ++l) {
            const double d_eps = den[l] + kRiskEpsilon;
            run += dl_dh[l] * num[l] / (d_eps * d_eps);
            cum_b[l] = run;
        }
        for (Eigen::Index j = 0; j < b; ++j) {
            if (j == i) continue;
            const std::size_t gj = idx.grid_of[static_cast<std::size_t>(j)];
            double g = -cum_b[std::min(gj, gi)];
            if (batch.event(static_cast<std::size_t>(j)) && gj <= gi)
                g += dl_dh[gj] / (den[gj] + kRiskEpsilon);
            dL_dK(i, j) = g;
        }
    }

    // back through K_ij = exp(-dist2_ij): both orientations of a pair share
    // one distance
    Eigen::MatrixXd dL_dDist = -K.array() * (dL_dK + dL_dK.transpose()).array();
    Eigen::VectorXd row_sums = dL_dDist.rowwise().sum();
    Eigen::MatrixXd dZ =
        2.0 * (row_sums.asDiagonal() * Z - dL_dDist * Z);

    LossAndGradient out;
    out.value = loss;
    out.gradient = net.backward(cache, dZ);
    return out;
}

LossReport survival_loss(const EmbeddingNet& net, const SurvivalDataset& batch,
                         const TimeGrid& grid) {
    EmbeddingNet copy = net;
    const auto lg = survival_loss_with_gradient(copy, batch, grid);
    LossReport report;
    report.value = lg.value;
    report.batch_values = {lg.value};
    report.gradient_norm = lg.gradient.norm();
    return report;
}

Eigen::VectorXd loss_gradient(const EmbeddingNet& net, const SurvivalDataset& batch,
                              const TimeGrid& grid) {
    EmbeddingNet copy = net;
    return survival_loss_with_gradient(copy, batch, grid).gradient;
}

}  // namespace ksa

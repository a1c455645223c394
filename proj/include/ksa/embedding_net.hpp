#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace ksa {

/// Multilayer perceptron shape: each hidden layer is Linear -> ReLU ->
/// BatchNorm; the final layer is Linear with bias and output width equal to
/// the input feature count.
struct MLPSpec {
    int hidden_layers = 1;
    int hidden_width = 32;
};

enum class Arch { Basic, Diag, ResBasic, ResDiag, Mlp };

struct BatchNormStats {
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
};

/// Cache of one training-mode batch forward pass, consumed by backward().
struct ForwardCache;

/// Embedding map psi: R^d -> R^d with a flat parameter vector.
///
/// Basic scales by one scalar, Diag by a per-feature vector, Mlp is the
/// perceptron above, and ResBasic/ResDiag compute xi(x + lambda * phi(x))
/// with phi an MLP whose final layer starts at zero, so the whole map starts
/// at xi (identity scaling).
class EmbeddingNet {
public:
    EmbeddingNet() = default;  // empty net; assign from a factory before use

    static EmbeddingNet basic(int input_dim);
    static EmbeddingNet diag(int input_dim);
    static EmbeddingNet mlp(int input_dim, const MLPSpec& spec, std::uint64_t seed);
    static EmbeddingNet residual(int input_dim, const MLPSpec& spec, bool diag_outer,
                                 double lambda, std::uint64_t seed);
    /// Rebuild a net from serialized pieces.
    static EmbeddingNet restore(Arch arch, int input_dim, const MLPSpec& spec, double lambda,
                                Eigen::VectorXd parameters,
                                std::vector<BatchNormStats> bn_stats);

    Arch arch() const { return arch_; }
    int input_dim() const { return input_dim_; }
    int output_dim() const { return input_dim_; }
    double lambda() const { return lambda_; }
    const MLPSpec& mlp_spec() const { return spec_; }

    const Eigen::VectorXd& parameters() const { return params_; }
    void set_parameters(const Eigen::VectorXd& p);
    Eigen::Index parameter_count() const { return params_.size(); }

    const std::vector<BatchNormStats>& bn_stats() const { return bn_stats_; }

    /// Evaluation-mode forward for a single point (BatchNorm uses running
    /// statistics). This is the map the learned kernel is built from.
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    /// Batched forward; rows are subjects. In training mode BatchNorm uses
    /// batch statistics and `cache` (if given) records everything backward()
    /// needs. Running statistics are not touched here.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X, bool train_mode,
                                  ForwardCache* cache = nullptr) const;

    /// Parameter gradient for a training-mode batch, given dLoss/dOutput.
    Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::MatrixXd& d_output) const;

    /// Fold the cached batch statistics into the running averages
    /// (momentum 0.1). Called once per optimizer step.
    void update_running_stats(const ForwardCache& cache);

private:
    Arch arch_ = Arch::Basic;
    int input_dim_ = 0;
    double lambda_ = 0.1;
    MLPSpec spec_;
    Eigen::VectorXd params_;
    std::vector<BatchNormStats> bn_stats_;  // one per hidden layer when MLP present

    friend struct NetAccess;
};

struct MlpLayerCache {
    Eigen::MatrixXd input;       // B x in
    Eigen::MatrixXd preact;      // B x w (pre-ReLU)
    Eigen::MatrixXd relu_out;    // B x w (post-ReLU, pre-BN)
    Eigen::MatrixXd xhat;        // B x w
    Eigen::VectorXd batch_mean;  // w
    Eigen::VectorXd batch_var;   // w (biased)
    Eigen::VectorXd inv_std;     // w
};

struct ForwardCache {
    Eigen::MatrixXd input;            // batch input X
    std::vector<MlpLayerCache> layers;
    Eigen::MatrixXd mlp_final_input;  // input to the final linear layer
    Eigen::MatrixXd mlp_out;          // phi(X) (residual) or psi(X) (mlp)
    Eigen::MatrixXd residual_pre;     // X + lambda * phi(X)
};

}  // namespace ksa

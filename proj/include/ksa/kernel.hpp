#pragma once

#include "ksa/dataset.hpp"
#include "ksa/embedding_net.hpp"

#include <Eigen/Core>
#include <memory>
#include <string>

namespace ksa {

/// Kernel state prepared against a fixed set of rows so that repeated
/// queries are cheap (e.g. embeddings computed once).
class PreparedKernel {
public:
    virtual ~PreparedKernel() = default;
    /// K(x, rows[i]) for every prepared row.
    virtual Eigen::VectorXd weights(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::Index row_count() const = 0;
};

/// Nonnegative symmetric similarity K(x, x') between feature vectors.
class Kernel {
public:
    virtual ~Kernel() = default;
    virtual double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const = 0;
    virtual std::unique_ptr<const PreparedKernel> prepare(const Eigen::MatrixXd& rows) const;
};

/// K == 1 everywhere; conditional Kaplan-Meier collapses to the marginal one.
class ConstantKernel final : public Kernel {
public:
    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override;
    std::unique_ptr<const PreparedKernel> prepare(const Eigen::MatrixXd& rows) const override;
};

/// K = 1 when ||x - x'|| <= sigma, else 0.
class BoxKernel final : public Kernel {
public:
    explicit BoxKernel(double sigma);
    double sigma() const { return sigma_; }
    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override;

private:
    double sigma_;
};

/// K = exp(-||psi(x) - psi(x')||^2) with the embedding net always run in
/// evaluation mode. K(x, x) == 1 exactly.
class GaussianEmbeddingKernel final : public Kernel {
public:
    explicit GaussianEmbeddingKernel(EmbeddingNet net);
    const EmbeddingNet& net() const { return net_; }
    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override;
    std::unique_ptr<const PreparedKernel> prepare(const Eigen::MatrixXd& rows) const override;

private:
    EmbeddingNet net_;
};

/// Kernel given by a stored matrix over indexed points (e.g. a random
/// survival forest's leaf-agreement fractions). Only indexed points can be
/// evaluated; anything else is an error.
class PrecomputedKernel final : public Kernel {
public:
    explicit PrecomputedKernel(Eigen::MatrixXd values);

    /// Associate matrix rows with the rows of `data` (by feature vector).
    void bind(const SurvivalDataset& data);
    bool bound() const { return !index_.empty(); }

    const Eigen::MatrixXd& values() const { return values_; }
    double at(std::size_t i, std::size_t j) const;

    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const override;

private:
    std::size_t lookup(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd values_;
    // exact byte-wise feature lookup; good enough since indexed queries reuse
    // the very same vectors that were bound
    std::vector<std::pair<std::string, std::size_t>> index_;
};

/// Matrix of kernel evaluations with row/column provenance.
struct KernelMatrix {
    Eigen::MatrixXd values;
    std::string row_source;
    std::string col_source;
};

/// Entry (i, j) = K(rows[i], cols[j]).
KernelMatrix kernel_matrix(const Kernel& kernel, const SurvivalDataset& rows,
                           const SurvivalDataset& cols);

/// Read a headerless square CSV of kernel values in [0, 1]; symmetry is
/// required to 1e-9 (the stored matrix is symmetrized).
std::shared_ptr<PrecomputedKernel> load_kernel_matrix(const std::string& path);

}  // namespace ksa

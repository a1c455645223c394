#include "ksa/kernel.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ksa {
namespace {

class LoopPrepared final : public PreparedKernel {
public:
    LoopPrepared(const Kernel& kernel, Eigen::MatrixXd rows)
        : kernel_(kernel), rows_(std::move(rows)) {}
    Eigen::VectorXd weights(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd w(rows_.rows());
        for (Eigen::Index i = 0; i < rows_.rows(); ++i)
            w[i] = kernel_.evaluate(x, rows_.row(i));
        return w;
    }
    Eigen::Index row_count() const override { return rows_.rows(); }

private:
    const Kernel& kernel_;
    Eigen::MatrixXd rows_;
};

class ConstantPrepared final : public PreparedKernel {
public:
    explicit ConstantPrepared(Eigen::Index n) : n_(n) {}
    Eigen::VectorXd weights(const Eigen::VectorXd&) const override {
        return Eigen::VectorXd::Ones(n_);
    }
    Eigen::Index row_count() const override { return n_; }

private:
    Eigen::Index n_;
};

class EmbeddedPrepared final : public PreparedKernel {
public:
    EmbeddedPrepared(EmbeddingNet net, const Eigen::MatrixXd& rows)
        : net_(std::move(net)), embedded_(net_.forward_batch(rows, /*train_mode=*/false)) {}
    Eigen::VectorXd weights(const Eigen::VectorXd& x) const override {
        const Eigen::VectorXd z = net_.forward(x);
        return (-(embedded_.rowwise() - z.transpose()).rowwise().squaredNorm())
            .array()
            .exp();
    }
    Eigen::Index row_count() const override { return embedded_.rows(); }

private:
    EmbeddingNet net_;
    Eigen::MatrixXd embedded_;
};

std::string feature_key(const Eigen::VectorXd& x) {
    std::string key(static_cast<std::size_t>(x.size()) * sizeof(double), '\0');
    std::memcpy(key.data(), x.data(), key.size());
    return key;
}

}  // namespace

std::unique_ptr<const PreparedKernel> Kernel::prepare(const Eigen::MatrixXd& rows) const {
    return std::make_unique<LoopPrepared>(*this, rows);
}

double ConstantKernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
    if (x.size() != xp.size())
        throw std::invalid_argument("ConstantKernel: dimension mismatch");
    return 1.0;
}

std::unique_ptr<const PreparedKernel> ConstantKernel::prepare(
    const Eigen::MatrixXd& rows) const {
    return std::make_unique<ConstantPrepared>(rows.rows());
}

BoxKernel::BoxKernel(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("BoxKernel: sigma must be positive");
}

double BoxKernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
    if (x.size() != xp.size()) throw std::invalid_argument("BoxKernel: dimension mismatch");
    return (x - xp).norm() <= sigma_ ? 1.0 : 0.0;
}

GaussianEmbeddingKernel::GaussianEmbeddingKernel(EmbeddingNet net) : net_(std::move(net)) {}

double GaussianEmbeddingKernel::evaluate(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& xp) const {
    return std::exp(-(net_.forward(x) - net_.forward(xp)).squaredNorm());
}

std::unique_ptr<const PreparedKernel> GaussianEmbeddingKernel::prepare(
    const Eigen::MatrixXd& rows) const {
    return std::make_unique<EmbeddedPrepared>(net_, rows);
}

PrecomputedKernel::PrecomputedKernel(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols())
        throw std::invalid_argument("PrecomputedKernel: matrix must be square");
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double v = values_(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("PrecomputedKernel: entry outside [0,1] at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        }
}

void PrecomputedKernel::bind(const SurvivalDataset& data) {
    if (static_cast<Eigen::Index>(data.size()) != values_.rows())
        throw std::invalid_argument("PrecomputedKernel: dataset size does not match matrix");
    index_.clear();
    index_.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        index_.emplace_back(feature_key(data.feature_row(i)), i);
    std::sort(index_.begin(), index_.end());
}

std::size_t PrecomputedKernel::lookup(const Eigen::VectorXd& x) const {
    if (index_.empty())
        throw std::logic_error("PrecomputedKernel: no dataset bound");
    const auto key = feature_key(x);
    const auto it = std::lower_bound(
        index_.begin(), index_.end(), key,
        [](const auto& entry, const std::string& k) { return entry.first < k; });
    if (it == index_.end() || it->first != key)
        throw std::invalid_argument("PrecomputedKernel: point is not indexed");
    return it->second;
}

double PrecomputedKernel::at(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double PrecomputedKernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
    return at(lookup(x), lookup(xp));
}

KernelMatrix kernel_matrix(const Kernel& kernel, const SurvivalDataset& rows,
                           const SurvivalDataset& cols) {
    KernelMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
    const auto prepared = kernel.prepare(cols.features());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.values.row(static_cast<Eigen::Index>(i)) =
            prepared->weights(rows.feature_row(i)).transpose();
    return out;
}

std::shared_ptr<PrecomputedKernel> load_kernel_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("kernel matrix: cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            auto comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            std::string cell = line.substr(start, comma - start);
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw std::runtime_error("kernel matrix: unparseable cell at line " +
                                         std::to_string(line_no));
            row.push_back(v);
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    const auto n = rows.size();
    if (n == 0) throw std::runtime_error("kernel matrix: empty file");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            throw std::runtime_error("kernel matrix: not square at line " +
                                     std::to_string(i + 1));
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-9)
                throw std::runtime_error("kernel matrix: asymmetric beyond 1e-9 at (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    return std::make_shared<PrecomputedKernel>(std::move(sym));
}

}  // namespace ksa

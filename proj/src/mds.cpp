#include "ksa/mds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace ksa {

namespace {
// Guard keeping log(1/K) finite; entries below this count as this.
constexpr double kKernelGuard = 1e-6;
}

MdsResult mds_embed(const KernelMatrix& matrix, std::size_t dim) {
    const auto& K = matrix.values;
    const auto n = K.rows();
    if (n == 0 || K.cols() != n)
        throw std::invalid_argument("mds_embed: matrix must be square and nonempty");
    if (dim == 0 || static_cast<Eigen::Index>(dim) > n)
        throw std::invalid_argument("mds_embed: dim must be in [1, n]");

    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double k = std::max(K(i, j), kKernelGuard);
            if (!(k > 0.0))
                throw std::invalid_argument("mds_embed: nonpositive kernel entry after guard");
            d2(i, j) = i == j ? 0.0 : std::max(0.0, std::log(1.0 / k));
        }
    }

    // double centering: B = -1/2 J d2 J with J = I - 11^T / n
    const Eigen::VectorXd row_means = d2.rowwise().mean();
    const double grand = row_means.mean();
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            B(i, j) = -0.5 * (d2(i, j) - row_means[i] - row_means[j] + grand);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("mds_embed: eigendecomposition failed");

    // eigenvalues come sorted ascending; take the top `dim`, clip negatives
    Eigen::MatrixXd coords(n, static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
        const Eigen::Index idx = n - 1 - static_cast<Eigen::Index>(k);
        const double lambda = std::max(0.0, solver.eigenvalues()[idx]);
        coords.col(static_cast<Eigen::Index>(k)) =
            solver.eigenvectors().col(idx) * std::sqrt(lambda);
    }

    MdsResult out;
    out.points.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.points.push_back(coords.row(i));

    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double target = std::sqrt(d2(i, j));
            const double fitted = (coords.row(i) - coords.row(j)).norm();
            num += (fitted - target) * (fitted - target);
            den += target * target;
        }
    }
    out.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

}  // namespace ksa

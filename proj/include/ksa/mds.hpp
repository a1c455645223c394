#pragma once

#include "ksa/kernel.hpp"

#include <Eigen/Core>
#include <vector>

namespace ksa {

struct MdsResult {
    std::vector<Eigen::VectorXd> points;  // one embedding per matrix row
    /// Kruskal stress-1 between embedded and target distances.
    double stress = 0.0;
};

/// Classical multidimensional scaling of the distances implied by a kernel
/// matrix: squared target distance log(1 / K_ij), guarded away from K = 0.
/// The squared-distance matrix is double-centered and the top `dim`
/// eigenpairs taken, with negative eigenvalues truncated to zero.
MdsResult mds_embed(const KernelMatrix& matrix, std::size_t dim);

}  // namespace ksa

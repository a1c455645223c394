#pragma once

#include "ksa/dataset.hpp"
#include "ksa/embedding_net.hpp"
#include "ksa/train.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ksa {

/// One point of the hyperparameter grid: optimizer settings plus, for
/// MLP-bearing architectures, the perceptron shape.
struct CvCandidate {
    TrainConfig config;
    MLPSpec mlp;
    std::string describe() const;
};

enum class CvSelect { Ctd, Loss };

struct CvOptions {
    int folds = 5;
    CvSelect select = CvSelect::Ctd;
    double lambda = 0.1;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct CvResult {
    std::size_t best_index = 0;
    std::vector<CvCandidate> candidates;
    std::vector<double> mean_ctd;   // per candidate, across folds
    std::vector<double> mean_loss;  // per candidate, across folds
};

/// The full search grid: epochs {10,20} x batch {64,128} x learning rate
/// {0.01,0.001} x time grid {all unique, 64, 128}, and for MLP-bearing nets
/// additionally hidden layers {1,2,4} x width {16,32,64}. Enumeration order
/// is fixed and doubles as the tie-break order.
std::vector<CvCandidate> search_grid(Arch arch);

EmbeddingNet make_net(Arch arch, int input_dim, const MLPSpec& spec, double lambda,
                      std::uint64_t seed);

/// Seeded k-fold cross-validation over the grid. Fits may run on several
/// threads (`jobs`); selection compares recorded scores, not completion
/// order, with score ties going to the earlier grid point.
CvResult cross_validate(Arch arch, const SurvivalDataset& train, const CvOptions& options);

}  // namespace ksa

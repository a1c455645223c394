#pragma once

#include "ksa/dataset.hpp"
#include "ksa/embedding_net.hpp"

#include <optional>
#include <string>

namespace ksa {

/// Everything needed to rebuild the learned kernel and predict: the net,
/// the training time grid, and the ingestion standardization to reapply to
/// calibration/test/query files.
struct ModelFile {
    EmbeddingNet net;
    TimeGrid grid;
    std::optional<Standardization> standardization;
    std::vector<std::string> feature_names;
    double epsilon = 1e-12;
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

std::string arch_name(Arch arch);
Arch arch_from_name(const std::string& name);

}  // namespace ksa

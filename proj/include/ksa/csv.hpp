#pragma once

#include "ksa/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ksa {

/// Column mapping for survival CSV ingestion. Cells in mapped columns must
/// be plain numbers (no quoting, `.` decimal separator); categorical
/// encoding is the caller's responsibility.
struct CsvSchema {
    std::string time_column;
    std::string event_column;
    std::vector<std::string> feature_columns;
    /// Standardize feature columns. When `reuse` is set those statistics are
    /// applied instead of computing new ones (train-time statistics are reused
    /// for calibration/test ingestion).
    bool standardize = false;
    std::optional<Standardization> reuse;
};

/// Load a header-first, comma-separated survival dataset. Rows keep file
/// order. Parse errors report the 1-based file line and the column name.
SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema);

/// Write a dataset in the ingestion schema: time, event, then features.
void write_csv(const std::string& path, const SurvivalDataset& dataset,
               const std::string& time_column = "time",
               const std::string& event_column = "event");

/// Load only feature columns (query files carry no outcomes). Statistics,
/// when given, are applied to the columns.
Eigen::MatrixXd load_feature_csv(const std::string& path,
                                 const std::vector<std::string>& feature_columns,
                                 const std::optional<Standardization>& reuse = std::nullopt);

/// Header of a CSV file, in column order.
std::vector<std::string> csv_header(const std::string& path);

}  // namespace ksa

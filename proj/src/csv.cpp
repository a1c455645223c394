#include "ksa/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksa {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    // strip surrounding whitespace and a trailing \r
    for (auto& c : cells) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ' || c.back() == '\t'))
            c.pop_back();
        std::size_t i = 0;
        while (i < c.size() && (c[i] == ' ' || c[i] == '\t')) ++i;
        c.erase(0, i);
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(value))
        throw std::runtime_error("csv: unparseable cell '" + cell + "' at line " +
                                 std::to_string(line_no) + ", column '" + column + "'");
    return value;
}

}  // namespace

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.feature_columns.empty())
        throw std::invalid_argument("csv: schema needs at least one feature column");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path + "' is empty");
    const auto header = split_line(line);

    auto column_index = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw std::runtime_error("csv: column '" + name + "' not found in '" + path + "'");
    };
    const std::size_t time_idx = column_index(schema.time_column);
    const std::size_t event_idx = column_index(schema.event_column);
    std::vector<std::size_t> feature_idx;
    feature_idx.reserve(schema.feature_columns.size());
    for (const auto& name : schema.feature_columns) feature_idx.push_back(column_index(name));

    std::vector<double> times;
    std::vector<std::uint8_t> events;
    std::vector<double> flat;  // row-major features
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: line " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        const double t = parse_cell(cells[time_idx], line_no, schema.time_column);
        if (t < 0.0)
            throw std::runtime_error("csv: negative observed time at line " +
                                     std::to_string(line_no) + ", column '" +
                                     schema.time_column + "'");
        const double e = parse_cell(cells[event_idx], line_no, schema.event_column);
        if (e != 0.0 && e != 1.0)
            throw std::runtime_error("csv: event value outside {0,1} at line " +
                                     std::to_string(line_no) + ", column '" +
                                     schema.event_column + "'");
        times.push_back(t);
        events.push_back(static_cast<std::uint8_t>(e));
        for (std::size_t k = 0; k < feature_idx.size(); ++k)
            flat.push_back(parse_cell(cells[feature_idx[k]], line_no,
                                      schema.feature_columns[k]));
    }

    const auto n = static_cast<Eigen::Index>(times.size());
    const auto d = static_cast<Eigen::Index>(schema.feature_columns.size());
    Eigen::MatrixXd features(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            features(i, j) = flat[static_cast<std::size_t>(i * d + j)];
    Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(times.data(), n);

    SurvivalDataset out(std::move(features), std::move(t), std::move(events),
                        schema.feature_columns);
    if (schema.reuse)
        out.standardize(schema.reuse);
    else if (schema.standardize)
        out.standardize();
    return out;
}

Eigen::MatrixXd load_feature_csv(const std::string& path,
                                 const std::vector<std::string>& feature_columns,
                                 const std::optional<Standardization>& reuse) {
    if (feature_columns.empty())
        throw std::invalid_argument("csv: need at least one feature column");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path + "' is empty");
    const auto header = split_line(line);
    std::vector<std::size_t> idx;
    for (const auto& name : feature_columns) {
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) {
                idx.push_back(j);
                found = true;
                break;
            }
        if (!found)
            throw std::runtime_error("csv: column '" + name + "' not found in '" + path + "'");
    }
    std::vector<double> flat;
    std::size_t line_no = 1, rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: line " + std::to_string(line_no) +
                                     " has the wrong cell count");
        for (std::size_t k = 0; k < idx.size(); ++k)
            flat.push_back(parse_cell(cells[idx[k]], line_no, feature_columns[k]));
        ++rows;
    }
    const auto d = static_cast<Eigen::Index>(feature_columns.size());
    Eigen::MatrixXd features(static_cast<Eigen::Index>(rows), d);
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            features(i, j) = flat[static_cast<std::size_t>(i * d + j)];
    if (reuse) {
        if (reuse->mean.size() != d || reuse->scale.size() != d)
            throw std::invalid_argument("csv: standardization dimension mismatch");
        features.rowwise() -= reuse->mean.transpose();
        features.array().rowwise() /= reuse->scale.transpose().array();
    }
    return features;
}

std::vector<std::string> csv_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path + "' is empty");
    return split_line(line);
}

void write_csv(const std::string& path, const SurvivalDataset& dataset,
               const std::string& time_column, const std::string& event_column) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
    out << time_column << ',' << event_column;
    const auto d = dataset.feature_dim();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j < static_cast<Eigen::Index>(dataset.feature_names().size()))
            out << ',' << dataset.feature_names()[static_cast<std::size_t>(j)];
        else
            out << ",x" << (j + 1);
    }
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.time(i) << ',' << dataset.event(i);
        for (Eigen::Index j = 0; j < d; ++j)
            out << ',' << dataset.features()(static_cast<Eigen::Index>(i), j);
        out << '\n';
    }
}

}  // namespace ksa

#pragma once

#include "mlkm/data.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mlkm {

/// Header plus numeric body of a comma-separated file.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Throws ParseError naming the 1-based line and column of the bad cell.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Per-column min-max bounds of the covariates. Constant columns map to 0.5.
struct Bounds {
  std::vector<std::string> names;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::vector<std::string> constant_columns() const;
};

Bounds fit_bounds(const Eigen::MatrixXd& x, std::vector<std::string> names = {});

/// (x - lower) / (upper - lower) column-wise; values outside the training
/// range are not clipped.
Eigen::MatrixXd apply_bounds(const Bounds& bounds, const Eigen::MatrixXd& x);

nlohmann::json to_json(const Bounds& bounds);
Bounds bounds_from_json(const nlohmann::json& j);

/// Covariates are every column except `target_column` (the last column when
/// empty). Provenance records the path, the target and, when normalizing,
/// the bounds.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column = {},
                 bool normalize = true);

/// Splits a table into covariates and target without normalization.
Dataset table_to_dataset(const CsvTable& table, const std::string& target_column);

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

}  // namespace mlkm

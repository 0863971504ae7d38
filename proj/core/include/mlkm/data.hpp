#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace mlkm {

/// Covariate matrix (one row per sample), responses, and optionally the
/// noiseless regression function at each row when the data are simulated.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> truth;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }

  /// Throws DimMismatch / NonFiniteInput.
  void validate() const;

  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Random split into (first `first_size` rows of a permutation, the rest).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_split(
    std::size_t n, std::size_t first_size, std::uint64_t seed);

double mean_squared_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace mlkm

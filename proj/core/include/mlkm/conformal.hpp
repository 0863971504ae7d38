#pragma once

#include "mlkm/kernel.hpp"
#include "mlkm/predictor.hpp"
#include "mlkm/simdata.hpp"
#include "mlkm/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mlkm {

enum class WeightMode { Weighted, Unweighted };

/// How fit_variance treats an ill-posed Jacobian Gram matrix.
enum class VariancePolicy {
  Auto,          // weighted when possible, otherwise unweighted
  WeightedOnly,  // DegenerateFit instead of falling back
  Unweighted,
};

std::string to_string(WeightMode mode);
std::string to_string(VariancePolicy policy);
WeightMode parse_weight_mode(const std::string& name);
VariancePolicy parse_variance_policy(const std::string& name);

/// Fallback thresholds of fit_variance.
inline constexpr double kMaxGramCondition = 1e12;

/// Local noise scale sigma_y(x) = sqrt(sigma2 * (g^T G^{-1} g + 1)) with g the
/// parameter gradient at x, or 1 everywhere in unweighted mode.
struct VarianceModel {
  WeightMode mode = WeightMode::Unweighted;
  double sigma2 = 1.0;
  Eigen::MatrixXd gram_inverse;  // p x p, empty when unweighted
  std::size_t parameters = 0;
  std::size_t fit_size = 0;
  double condition = 0.0;   // of F^T F; 0 when never formed
  std::string fallback;     // why weighting was abandoned, empty otherwise

  Eigen::VectorXd scale(const Predictor& model, const Eigen::MatrixXd& x) const;
};

VarianceModel fit_variance(const Predictor& model, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, VariancePolicy policy = VariancePolicy::Auto);

struct ConformalCalibration {
  double alpha = 0.1;
  std::size_t m = 0;
  std::size_t rank = 0;  // 1-based order statistic, may exceed m
  bool unbounded = false;
  double quantile = 0.0;  // +infinity when unbounded
  WeightMode mode = WeightMode::Unweighted;
};

/// ceil((1 - alpha)(m + 1)) with a guard against representation error.
std::size_t conformal_rank(std::size_t m, double alpha);

/// |y - f(x)| / sigma_y(x) for every row.
Eigen::VectorXd conformal_residuals(const Predictor& model, const VarianceModel& variance,
                                    const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

ConformalCalibration calibrate(const Predictor& model, const VarianceModel& variance,
                               const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha);

struct PredictionInterval {
  double prediction = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double scale = 1.0;
  bool unbounded = false;

  bool contains(double y) const { return unbounded || (lower <= y && y <= upper); }
  double length() const { return upper - lower; }
};

std::vector<PredictionInterval> predict_intervals(const Predictor& model,
                                                  const VarianceModel& variance,
                                                  const ConformalCalibration& calibration,
                                                  const Eigen::MatrixXd& x);

PredictionInterval predict_interval(const Predictor& model, const VarianceModel& variance,
                                    const ConformalCalibration& calibration,
                                    const Eigen::Ref<const Eigen::VectorXd>& x);

/// Exchangeable i.i.d. residuals from a fixed zero predictor.
struct ResidualOracle {
  enum class Noise { Normal, Laplace, Uniform };
  std::size_t m = 19;
  Noise noise = Noise::Normal;
};

/// Simulate, split into fit and calibration parts, train a cross-fit
/// network on the fit part and score fresh test points.
struct PipelineStudy {
  Scenario data;
  std::string architecture = "4-32-8-1";
  std::vector<KernelSpec> kernels{KernelSpec::gaussian(1.0)};
  bool residual = false;
  TrainConfig train;
  std::size_t fit_size = 500;
  std::size_t calib_size = 500;
  std::size_t test_points = 1;
  VariancePolicy policy = VariancePolicy::Auto;
};

using CoverageScenario = std::variant<ResidualOracle, PipelineStudy>;

struct CoverageResult {
  double alpha = 0.0;
  std::size_t m = 0;
  std::size_t replications = 0;
  std::size_t evaluations = 0;  // replications x test points
  double coverage = 0.0;
  double se = 0.0;           // sqrt(c (1 - c) / replications)
  double mean_length = 0.0;  // over bounded intervals; +inf if none
  std::size_t unbounded = 0;
  std::size_t weighted_runs = 0;
  double band_low = 0.0;   // 1 - alpha
  double band_high = 0.0;  // 1 - alpha + 1 / (m + 1)

  /// Coverage lies within k standard errors of [band_low, band_high].
  bool within_band(double k = 3.0) const;
};

/// Replication r draws everything from derive_seed(seed, r), so results do
/// not depend on the thread count.
CoverageResult coverage_study(const CoverageScenario& scenario, double alpha,
                              std::size_t replications, std::uint64_t seed,
                              std::size_t threads = 1);

nlohmann::json to_json(const CoverageResult& result);

}  // namespace mlkm

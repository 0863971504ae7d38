#pragma once

#include <Eigen/Core>

#include <optional>

namespace mlkm {

/// Anything that maps covariate rows to a scalar prediction.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::size_t input_dim() const = 0;
  virtual Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const = 0;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXd row = x.transpose();
    return predict_batch(row)(0);
  }

  /// Rows are gradients of the prediction with respect to the fitted
  /// parameters. Models without a finite parameter vector return nullopt.
  virtual std::optional<Eigen::MatrixXd> param_jacobian(const Eigen::MatrixXd& /*x*/) const {
    return std::nullopt;
  }
};

}  // namespace mlkm

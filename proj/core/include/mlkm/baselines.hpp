#pragma once

#include "mlkm/data.hpp"
#include "mlkm/features.hpp"
#include "mlkm/kernel.hpp"
#include "mlkm/predictor.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace mlkm {

/// Exact kernel ridge regression: alpha = (K + lambda n I)^{-1} Y and
/// f(x) = sum_i alpha_i K(x, x_i).
class KrrModel : public Predictor {
 public:
  KrrModel(KernelSpec kernel, Eigen::MatrixXd train_x, Eigen::VectorXd alpha, double lambda);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Eigen::MatrixXd& train_x() const noexcept { return train_x_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double lambda() const noexcept { return lambda_; }

  std::size_t input_dim() const override { return static_cast<std::size_t>(train_x_.cols()); }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override;

 private:
  KernelSpec kernel_;
  Eigen::MatrixXd train_x_;
  Eigen::VectorXd alpha_;
  double lambda_;
};

KrrModel krr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel,
                 double lambda);

/// Random-feature ridge regression: c = (Psi^T Psi + lambda n I)^{-1} Psi^T Y.
class RfRidgeModel : public Predictor {
 public:
  RfRidgeModel(FeatureMap features, Eigen::VectorXd coef, double lambda);

  const FeatureMap& features() const noexcept { return features_; }
  const Eigen::VectorXd& coef() const noexcept { return coef_; }
  double lambda() const noexcept { return lambda_; }

  std::size_t input_dim() const override { return features_.input_dim(); }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override;
  /// Linear in the coefficients, so the Jacobian is the feature matrix.
  std::optional<Eigen::MatrixXd> param_jacobian(const Eigen::MatrixXd& x) const override;

 private:
  FeatureMap features_;
  Eigen::VectorXd coef_;
  double lambda_;
};

RfRidgeModel rf_ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const FeatureMap& features, double lambda);

/// Fits a model for a given lambda on a training subset.
using RidgeFitter =
    std::function<std::unique_ptr<Predictor>(const Eigen::MatrixXd&, const Eigen::VectorXd&, double)>;

RidgeFitter krr_fitter(const KernelSpec& kernel);
RidgeFitter rf_ridge_fitter(const FeatureMap& features);

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> mean_mse;  // aligned with the grid
};

/// k-fold cross-validation over a lambda grid; ties go to the larger lambda.
CvResult cv_select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const RidgeFitter& fit, const std::vector<double>& grid,
                          std::size_t k, std::uint64_t seed, std::size_t threads = 1);

}  // namespace mlkm

#include "mlkm/baselines.hpp"

#include "mlkm/error.hpp"
#include "mlkm/linalg.hpp"
#include "mlkm/parallel.hpp"
#include "mlkm/training.hpp"

#include <cmath>
#include <string>

namespace mlkm {

namespace {

void check_xy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (x.rows() == 0) fail(Errc::TooFewSamples, "fit needs at least one sample");
  if (y.size() != x.rows()) fail(Errc::DimMismatch, "x and y differ in length");
  if (!x.allFinite() || !y.allFinite()) fail(Errc::NonFiniteInput, "non-finite training data");
  if (!(lambda >= 0.0)) fail(Errc::InvalidArgument, "lambda must be >= 0");
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

KrrModel::KrrModel(KernelSpec kernel, Eigen::MatrixXd train_x, Eigen::VectorXd alpha, double lambda)
    : kernel_(kernel), train_x_(std::move(train_x)), alpha_(std::move(alpha)), lambda_(lambda) {}

Eigen::VectorXd KrrModel::predict_batch(const Eigen::MatrixXd& x) const {
  return kernel_matrix(kernel_, x, train_x_) * alpha_;
}

KrrModel krr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel,
                 double lambda) {
  check_xy(x, y, lambda);
  Eigen::MatrixXd k = kernel_matrix(kernel, x, x);
  k.diagonal().array() += lambda * static_cast<double>(x.rows());
  Eigen::VectorXd alpha = solve_spd(k, y);
  return KrrModel(kernel, x, std::move(alpha), lambda);
}

RfRidgeModel::RfRidgeModel(FeatureMap features, Eigen::VectorXd coef, double lambda)
    : features_(std::move(features)), coef_(std::move(coef)), lambda_(lambda) {
  if (static_cast<std::size_t>(coef_.size()) != features_.num_features()) {
    fail(Errc::DimMismatch, "coefficient count differs from the feature count");
  }
}

Eigen::VectorXd RfRidgeModel::predict_batch(const Eigen::MatrixXd& x) const {
  return features_.apply_batch(x) * coef_;
}

std::optional<Eigen::MatrixXd> RfRidgeModel::param_jacobian(const Eigen::MatrixXd& x) const {
  return features_.apply_batch(x);
}

RfRidgeModel rf_ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const FeatureMap& features, double lambda) {
  check_xy(x, y, lambda);
  const Eigen::MatrixXd psi = features.apply_batch(x);
  Eigen::MatrixXd gram = psi.transpose() * psi;
  gram.diagonal().array() += lambda * static_cast<double>(x.rows());
  Eigen::VectorXd coef = solve_spd(gram, psi.transpose() * y);
  return RfRidgeModel(features, std::move(coef), lambda);
}

RidgeFitter krr_fitter(const KernelSpec& kernel) {
  return [kernel](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    return std::make_unique<KrrModel>(krr_fit(x, y, kernel, lambda));
  };
}

RidgeFitter rf_ridge_fitter(const FeatureMap& features) {
  return [features](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    return std::make_unique<RfRidgeModel>(rf_ridge_fit(x, y, features, lambda));
  };
}

CvResult cv_select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const RidgeFitter& fit, const std::vector<double>& grid,
                          std::size_t k, std::uint64_t seed, std::size_t threads) {
  if (grid.empty()) fail(Errc::InvalidArgument, "lambda grid is empty");
  if (k < 2) fail(Errc::InvalidArgument, "cross-validation needs k >= 2");
  if (static_cast<std::size_t>(x.rows()) < k) {
    fail(Errc::TooFewSamples, "cross-validation needs n >= k");
  }
  const FoldPlan plan = make_fold_plan(static_cast<std::size_t>(x.rows()), k, seed);

  std::vector<std::vector<double>> fold_mse(k, std::vector<double>(grid.size()));
  parallel_for(k, threads, [&](std::size_t f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train.insert(train.end(), plan.folds[g].begin(), plan.folds[g].end());
    }
    const Eigen::MatrixXd xt = rows_of(x, train);
    const Eigen::VectorXd yt = rows_of(y, train);
    const Eigen::MatrixXd xv = rows_of(x, plan.folds[f]);
    const Eigen::VectorXd yv = rows_of(y, plan.folds[f]);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto model = fit(xt, yt, grid[i]);
      fold_mse[f][i] = mean_squared_error(model->predict_batch(xv), yv);
    }
  });

  CvResult res;
  res.mean_mse.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) res.mean_mse[i] += fold_mse[f][i] / static_cast<double>(k);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = res.mean_mse[i];
    if (m < best || (m == best && grid[i] > res.best_lambda)) {
      best = m;
      res.best_lambda = grid[i];
    }
  }
  return res;
}

}  // namespace mlkm

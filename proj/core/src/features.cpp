#include "mlkm/features.hpp"

#include "mlkm/error.hpp"
#include "mlkm/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mlkm {

FeatureMap::FeatureMap(KernelSpec kernel, Eigen::MatrixXd omegas, Eigen::VectorXd phases,
                       std::uint64_t seed)
    : kernel_(kernel), omegas_(std::move(omegas)), phases_(std::move(phases)), seed_(seed) {
  kernel_.validate();
  if (omegas_.rows() == 0) fail(Errc::InvalidWidth, "feature map needs at least one feature");
  if (omegas_.cols() == 0) fail(Errc::InvalidDim, "feature map needs input_dim >= 1");
  if (phases_.size() != omegas_.rows()) {
    fail(Errc::DimMismatch, "phase count does not match the number of frequencies");
  }
  amplitude_ = std::sqrt(2.0 / static_cast<double>(omegas_.rows()));
}

Eigen::VectorXd FeatureMap::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    fail(Errc::DimMismatch, "feature map expects input of length " +
                                std::to_string(input_dim()) + ", got " +
                                std::to_string(x.size()));
  }
  Eigen::VectorXd s = omegas_ * x + phases_;
  return amplitude_ * s.array().cos().matrix();
}

Eigen::MatrixXd FeatureMap::preactivations(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    fail(Errc::DimMismatch, "feature map expects " + std::to_string(input_dim()) +
                                " columns, got " + std::to_string(x.cols()));
  }
  Eigen::MatrixXd s = x * omegas_.transpose();
  s.rowwise() += phases_.transpose();
  return s;
}

Eigen::MatrixXd FeatureMap::apply_batch(const Eigen::MatrixXd& x) const {
  return amplitude_ * preactivations(x).array().cos().matrix();
}

bool FeatureMap::operator==(const FeatureMap& other) const {
  return kernel_ == other.kernel_ && seed_ == other.seed_ && omegas_ == other.omegas_ &&
         phases_ == other.phases_;
}

FeatureMap spectral_sample(const KernelSpec& kernel, std::size_t input_dim,
                           std::size_t num_features, std::uint64_t seed) {
  if (num_features == 0) fail(Errc::InvalidWidth, "spectral_sample: D must be >= 1");
  if (input_dim == 0) fail(Errc::InvalidDim, "spectral_sample: input_dim must be >= 1");
  kernel.validate();

  const auto rows = static_cast<Eigen::Index>(num_features);
  const auto cols = static_cast<Eigen::Index>(input_dim);
  Eigen::MatrixXd omegas(rows, cols);
  Eigen::VectorXd phases(rows);

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv_scale = 1.0 / kernel.scale;

  for (Eigen::Index k = 0; k < rows; ++k) {
    switch (kernel.family) {
      case KernelFamily::Gaussian:
        for (Eigen::Index j = 0; j < cols; ++j) omegas(k, j) = normal(rng) * inv_scale;
        break;
      case KernelFamily::Laplacian: {
        std::cauchy_distribution<double> cauchy(0.0, inv_scale);
        for (Eigen::Index j = 0; j < cols; ++j) omegas(k, j) = cauchy(rng);
        break;
      }
      case KernelFamily::Cauchy: {
        std::exponential_distribution<double> expo(kernel.scale);  // mean 1/s
        for (Eigen::Index j = 0; j < cols; ++j) {
          const double mag = expo(rng);
          omegas(k, j) = unit(rng) < 0.5 ? -mag : mag;
        }
        break;
      }
      case KernelFamily::Matern: {
        std::chi_squared_distribution<double> chi2(2.0 * kernel.nu);
        const double v = chi2(rng);
        const double mult = std::sqrt(2.0 * kernel.nu / v) * inv_scale;
        for (Eigen::Index j = 0; j < cols; ++j) omegas(k, j) = normal(rng) * mult;
        break;
      }
    }
  }
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (Eigen::Index k = 0; k < rows; ++k) {
    // generate_canonical may round up to the closed endpoint.
    const double b = phase(rng);
    phases(k) = b < 2.0 * std::numbers::pi ? b : 0.0;
  }

  return FeatureMap(kernel, std::move(omegas), std::move(phases), seed);
}

double mc_kernel_error(const KernelSpec& kernel, const FeatureMap& fm,
                       const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const double approx = fm.apply(x).dot(fm.apply(y));
    worst = std::max(worst, std::abs(approx - kernel_eval(kernel, x, y)));
  }
  return worst;
}

}  // namespace mlkm

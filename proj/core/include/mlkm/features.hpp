#pragma once

#include "mlkm/kernel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

namespace mlkm {

/// Frozen random Fourier feature map phi(x) with entries
/// sqrt(2/D) * cos(omega_k . x + b_k). Immutable once built; safe to share.
class FeatureMap {
 public:
  /// Builds a map from explicit frequencies (D x input_dim) and phases (D).
  FeatureMap(KernelSpec kernel, Eigen::MatrixXd omegas, Eigen::VectorXd phases,
             std::uint64_t seed = 0);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(omegas_.cols()); }
  std::size_t num_features() const noexcept { return static_cast<std::size_t>(omegas_.rows()); }
  std::uint64_t seed() const noexcept { return seed_; }
  const Eigen::MatrixXd& omegas() const noexcept { return omegas_; }
  const Eigen::VectorXd& phases() const noexcept { return phases_; }
  double amplitude() const noexcept { return amplitude_; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Row-wise map of an n x input_dim matrix to n x D.
  Eigen::MatrixXd apply_batch(const Eigen::MatrixXd& x) const;

  /// Pre-activations x omega^T + b (n x D); the features are amplitude * cos of these.
  Eigen::MatrixXd preactivations(const Eigen::MatrixXd& x) const;

  bool operator==(const FeatureMap& other) const;

 private:
  KernelSpec kernel_;
  Eigen::MatrixXd omegas_;
  Eigen::VectorXd phases_;
  std::uint64_t seed_;
  double amplitude_;
};

/// Draws D frequencies from the kernel's spectral density and D uniform
/// phases on [0, 2pi). A pure function of its arguments.
///
///   Gaussian   omega ~ N(0, I / s^2)
///   Laplacian  omega_j ~ Cauchy(0, 1/s) per coordinate
///   Cauchy     omega_j ~ Laplace(0, 1/s) per coordinate
///   Matern     omega = (sqrt(2 nu)/s) z / sqrt(v),  z ~ N(0, I), v ~ chi2(2 nu)
FeatureMap spectral_sample(const KernelSpec& kernel, std::size_t input_dim,
                           std::size_t num_features, std::uint64_t seed);

/// max over pairs of |phi(x) . phi(y) - K(x, y)|.
double mc_kernel_error(const KernelSpec& kernel, const FeatureMap& fm,
                       const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs);

}  // namespace mlkm

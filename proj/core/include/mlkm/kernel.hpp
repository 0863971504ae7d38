#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace mlkm {

enum class KernelFamily { Gaussian, Matern, Laplacian, Cauchy };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily parse_kernel_family(std::string_view name);

/// A shift-invariant kernel normalized so that K(x, x) = 1.
///
///   Gaussian   exp(-|r|^2 / (2 s^2))
///   Matern     2^(1-nu)/Gamma(nu) * u^nu * K_nu(u),  u = sqrt(2 nu) |r| / s
///   Laplacian  exp(-|r|_1 / s)
///   Cauchy     prod_j 1 / (1 + r_j^2 / s^2)
///
/// `scale` is the bandwidth s; for a layered schedule it is c0 * gamma^l.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double scale = 1.0;
  double nu = 1.5;  // Matern only

  static KernelSpec gaussian(double scale);
  static KernelSpec matern(double scale, double nu);
  static KernelSpec laplacian(double scale);
  static KernelSpec cauchy(double scale);

  /// Throws InvalidArgument when scale <= 0 or (Matern and nu <= 0).
  void validate() const;

  /// Holder smoothness index implied by the family (+inf for Gaussian).
  double holder_q() const noexcept;

  bool operator==(const KernelSpec&) const = default;
};

double kernel_eval(const KernelSpec& kernel,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Dense Gram matrix K(a_i, b_j).
Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

/// Geometric bandwidth schedule c0 * gamma^l for l = 1..layers.
std::vector<double> scale_schedule(double c0, double gamma, std::size_t layers);

}  // namespace mlkm

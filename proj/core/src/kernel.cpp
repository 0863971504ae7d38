#include "mlkm/kernel.hpp"

#include "mlkm/error.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <algorithm>

namespace mlkm {

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Matern: return "matern";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::Cauchy: return "cauchy";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "matern") return KernelFamily::Matern;
  if (name == "laplacian") return KernelFamily::Laplacian;
  if (name == "cauchy") return KernelFamily::Cauchy;
  fail(Errc::InvalidArgument, "unknown kernel family '" + std::string(name) + "'");
}

KernelSpec KernelSpec::gaussian(double scale) {
  KernelSpec k{KernelFamily::Gaussian, scale, 1.5};
  k.validate();
  return k;
}

KernelSpec KernelSpec::matern(double scale, double nu) {
  KernelSpec k{KernelFamily::Matern, scale, nu};
  k.validate();
  return k;
}

KernelSpec KernelSpec::laplacian(double scale) {
  KernelSpec k{KernelFamily::Laplacian, scale, 1.5};
  k.validate();
  return k;
}

KernelSpec KernelSpec::cauchy(double scale) {
  KernelSpec k{KernelFamily::Cauchy, scale, 1.5};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(Errc::InvalidArgument, "kernel scale must be a positive finite number");
  }
  if (family == KernelFamily::Matern && (!(nu > 0.0) || !std::isfinite(nu))) {
    fail(Errc::InvalidArgument, "Matern nu must be a positive finite number");
  }
}

double KernelSpec::holder_q() const noexcept {
  switch (family) {
    case KernelFamily::Gaussian: return std::numeric_limits<double>::infinity();
    case KernelFamily::Matern: return nu;
    case KernelFamily::Laplacian: return 0.5;
    case KernelFamily::Cauchy: return 1.0;
  }
  return 0.0;
}

namespace {

double matern_profile(double r, double scale, double nu) {
  if (r == 0.0) return 1.0;
  const double u = std::sqrt(2.0 * nu) * r / scale;
  // K_nu underflows long before the product loses meaning.
  if (u > 700.0) return 0.0;
  return std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(u)) *
         std::cyl_bessel_k(nu, u);
}

template <class A, class B>
double eval_diff(const KernelSpec& k, const A& x, const B& y) {
  switch (k.family) {
    case KernelFamily::Gaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * k.scale * k.scale));
    case KernelFamily::Matern:
      return matern_profile((x - y).norm(), k.scale, k.nu);
    case KernelFamily::Laplacian:
      return std::exp(-(x - y).template lpNorm<1>() / k.scale);
    case KernelFamily::Cauchy: {
      double v = 1.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double r = (x(j) - y(j)) / k.scale;
        v /= 1.0 + r * r;
      }
      return v;
    }
  }
  return 0.0;
}

}  // namespace

double kernel_eval(const KernelSpec& kernel,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    fail(Errc::DimMismatch, "kernel_eval: vectors of length " + std::to_string(x.size()) +
                                " and " + std::to_string(y.size()));
  }
  kernel.validate();
  return eval_diff(kernel, x, y);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    fail(Errc::DimMismatch, "kernel_matrix: column counts differ");
  }
  kernel.validate();
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k(i, j) = eval_diff(kernel, a.row(i), b.row(j));
    }
  }
  return k;
}

std::vector<double> scale_schedule(double c0, double gamma, std::size_t layers) {
  if (!(c0 > 0.0) || !(gamma > 0.0)) {
    fail(Errc::InvalidArgument, "scale_schedule: c0 and gamma must be positive");
  }
  std::vector<double> out;
  out.reserve(layers);
  double s = c0;
  for (std::size_t l = 0; l < layers; ++l) {
    s *= gamma;
    out.push_back(s);
  }
  return out;
}

}  // namespace mlkm

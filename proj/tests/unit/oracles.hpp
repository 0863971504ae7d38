#pragma once

// Independent re-implementations used as test oracles. Nothing here calls
// into the library's forward or gradient code.

#include "mlkm/network.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> features(const mlkm::FeatureMap& fm, const std::vector<double>& x) {
  const std::size_t D = fm.num_features();
  std::vector<double> out(D);
  for (std::size_t k = 0; k < D; ++k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < fm.input_dim(); ++j) {
      dot += fm.omegas()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * x[j];
    }
    out[k] = std::sqrt(2.0 / static_cast<double>(D)) *
             std::cos(dot + fm.phases()(static_cast<Eigen::Index>(k)));
  }
  return out;
}

inline std::vector<double> matvec(const Eigen::MatrixXd& m, const std::vector<double>& v) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)] += m(r, c) * v[static_cast<std::size_t>(c)];
  }
  return out;
}

/// Scalar-loop forward pass for both plain and residual machines.
inline double forward(const mlkm::Network& net, const mlkm::Weights& w, const Eigen::VectorXd& xv) {
  std::vector<double> x(xv.data(), xv.data() + xv.size());
  const std::size_t L = net.arch.num_layers();
  std::vector<double> z = features(net.maps[0], x);
  if (!net.arch.residual) {
    for (std::size_t l = 0; l + 1 < L; ++l) z = features(net.maps[l + 1], matvec(w.mats[l], z));
    return matvec(w.mats[L - 1], z)[0];
  }
  for (std::size_t l = 1; l < L; ++l) {
    const auto u = matvec(w.mats[2 * (l - 1)], z);
    const auto v = matvec(w.mats[2 * (l - 1) + 1], features(net.maps[l], u));
    z.assign(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) z[k] = u[k] + v[k];
  }
  return matvec(w.mats.back(), z)[0];
}

inline double loss(const mlkm::Network& net, const mlkm::Weights& w, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, double ridge) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = y(i) - oracle::forward(net, w, x.row(i).transpose());
    s += r * r;
  }
  double pen = 0.0;
  for (const auto& m : w.mats) pen += m.squaredNorm();
  return s / static_cast<double>(x.rows()) + ridge * pen;
}

/// Central differences of `f` with respect to every flattened parameter.
inline Eigen::VectorXd central_diff(const mlkm::Architecture& arch, const Eigen::VectorXd& theta,
                                    const std::function<double(const mlkm::Weights&)>& f,
                                    double h = 1e-6) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    t(i) = theta(i) + h;
    const double up = f(mlkm::unflatten(arch, t));
    t(i) = theta(i) - h;
    const double down = f(mlkm::unflatten(arch, t));
    t(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

/// |a - b| <= rel * max(|a|, |b|) or |a - b| <= abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace oracle

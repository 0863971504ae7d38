#include "mlkm/linalg.hpp"

#include "mlkm/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace mlkm {

namespace {

constexpr double kMinRcond = 1e-15;

bool usable(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return llt.info() == Eigen::Success && llt.rcond() > kMinRcond;
}

}  // namespace

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    fail(Errc::DimMismatch, "solve_spd: incompatible shapes");
  }
  if (!a.allFinite() || !b.allFinite()) fail(Errc::NonFiniteInput, "solve_spd: non-finite input");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (usable(llt)) return llt.solve(b);

  const double jitter = 1e-10 * a.trace() / static_cast<double>(a.rows());
  if (jitter > 0.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (usable(llt)) return llt.solve(b);
  }
  fail(Errc::SingularSystem, "linear system is numerically singular");
}

double spd_condition(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace mlkm

#pragma once

#include <Eigen/Core>

namespace mlkm {

/// Solves A X = B for symmetric positive-definite A by Cholesky. When the
/// factorization fails or is numerically singular, retries once with
/// 1e-10 * trace(A)/n added to the diagonal; throws SingularSystem if that
/// also fails.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Ratio of extreme eigenvalues of a symmetric matrix (+inf if singular).
double spd_condition(const Eigen::MatrixXd& a);

}  // namespace mlkm

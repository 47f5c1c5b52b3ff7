#pragma once

#include <Eigen/Dense>

namespace siglift {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

double min_eigenvalue(const Eigen::MatrixXd& m);

// Symmetric and min eigenvalue >= -tol * max(1, max |entry|).
bool is_psd(const Eigen::MatrixXd& m, double tol);

// Symmetric square root with negative eigenvalues clamped to zero.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m);

}  // namespace siglift

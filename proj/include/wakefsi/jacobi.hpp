#pragma once

#include <Eigen/Dense>

namespace wakefsi {

struct SymmetricEigen {
    Eigen::VectorXd values;   // unsorted, diagonal order
    Eigen::MatrixXd vectors;  // columns
    int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Sweeps visit the
/// upper triangle row by row and stop once the off-diagonal Frobenius norm
/// is at most rel_tol * |A|_F.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double rel_tol = 1e-14,
                            int max_sweeps = 100);

struct OneSidedSvd {
    Eigen::MatrixXd u_scaled;  // columns are sigma_j * u_j
    Eigen::MatrixXd v;         // accumulated right rotations
    int sweeps = 0;
};

/// Hestenes one-sided Jacobi: rotates column pairs of `a` until every pair
/// is orthogonal to rel_tol relative to the product of their norms.
OneSidedSvd one_sided_jacobi(const Eigen::MatrixXd& a, double rel_tol = 1e-15,
                             int max_sweeps = 100);

}  // namespace wakefsi

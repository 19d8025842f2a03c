#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "nlkpz/grid.hpp"
#include "nlkpz/kernel.hpp"

namespace nlkpz {

/// Quadratic form of the linear nonlocal operator on interior nodes with the
/// solution extended by zero to the collar:
///   <A u, u> = 1/2 sum_x sum_j w_j (u(x + z_j) - u(x))^2,  A = m I - K.
/// Rows and columns follow grid.interior() order.
struct DirichletForm {
    Eigen::SparseMatrix<double> matrix;
    std::vector<std::size_t> nodes;
    double mass = 0.0;

    Eigen::Index size() const noexcept { return matrix.rows(); }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
    double quadratic(const Eigen::VectorXd& u) const { return u.dot(matrix * u); }
};

DirichletForm assemble_dirichlet_form(const Grid& grid, const DiscreteKernel& dk);

}  // namespace nlkpz

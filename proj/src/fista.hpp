#pragma once

#include <Eigen/Core>

#include "sparsespec/prox.hpp"

namespace sparsespec::detail {

double subproblem_loss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& GA,
                       const Eigen::MatrixXd& B, const Eigen::MatrixXd& GB);

/// Monotone FISTA on tr((A-B)^T G (A-B)) + lambda psi(B) with step 1/lipschitz.
/// Momentum is reset whenever an accelerated step would raise the objective,
/// and a plain proximal step from the current iterate is taken instead.
SolveResult accelerated_prox_gradient(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& GA,
                                      const Eigen::MatrixXd& A, double lambda,
                                      const Penalty& penalty, const SolverConfig& config,
                                      double lipschitz, const Eigen::MatrixXd& start);

}  // namespace sparsespec::detail

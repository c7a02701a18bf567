#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"
#include "sparsespec/pca.hpp"
#include "sparsespec/prox.hpp"

namespace sparsespec {

enum class Algorithm {
  kSpca,    // elementwise sparsity, each basis vector on its own
  kGspca,   // group lasso applied to each basis vector independently
  kJspca,   // row-l21: whole rows of B vanish together
  kJgspca,  // group-F1: whole groups of rows of B vanish together
};

std::string_view to_string(Algorithm algorithm);
/// Accepts "spca", "gspca", "jspca", "jgspca" (case-insensitive).
Algorithm parse_algorithm(std::string_view name);

struct AlternationConfig {
  int outer_max = 100;
  double epsilon = 1e-6;
  SolverConfig inner;
  /// Basis width; 0 selects k = p.
  Index k = 0;
  /// Use the exact l0 penalty instead of its l1 relaxation for SPCA.
  bool spca_l0 = false;

  void validate(Index p) const;
  Index width(Index p) const { return k == 0 ? p : k; }
};

/// The penalty each algorithm applies. For GSPCA the group penalty is applied
/// to each column of B separately.
Penalty penalty_for(Algorithm algorithm, const GroupStructure& groups, bool spca_l0 = false);

struct SparseBasis {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Algorithm algorithm = Algorithm::kJgspca;
  double lambda = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// Feature groups of the training data (bands).
  GroupStructure groups;
  /// Training column means; empty if unknown.
  Eigen::VectorXd column_mean;
  /// Joint criterion ||X - X B A^T||_F^2 + lambda psi(B): the starting value
  /// (A = V_{1:k}, B = 0) followed by the value after every outer step.
  std::vector<double> objective_history;
  /// ||A^T A - I||_F after every procrustes update.
  std::vector<double> orthonormality_history;

  Index p() const { return A.rows(); }
  Index k() const { return A.cols(); }
};

/// Alternating minimization: solve for B with A fixed, then rotate A by
/// procrustes, until ||B - B_prev||_F < epsilon or outer_max steps.
SparseBasis fit(const DataMatrix& X, Algorithm algorithm, double lambda,
                const AlternationConfig& config = {});

/// Same, reusing a precomputed decomposition of X.
SparseBasis fit(const DataMatrix& X, const PcaDecomposition& decomposition, Algorithm algorithm,
                double lambda, const AlternationConfig& config = {});

/// Smallest lambda at which B = 0 satisfies the first-order conditions of the
/// B-subproblem at A0.
double lambda_max(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A0, const Penalty& penalty,
                  const SolverConfig& config = {});

/// lambda_max at the PCA initialization A0 = V_{1:k} for an algorithm.
double lambda_max(const DataMatrix& X, Algorithm algorithm, const AlternationConfig& config = {});
double lambda_max(const DataMatrix& X, const PcaDecomposition& decomposition, Algorithm algorithm,
                  const AlternationConfig& config = {});

/// Number of groups whose block of rows has Frobenius norm above
/// zero_tol * (1 + ||B||_F).
Index group_cardinality(const Eigen::MatrixXd& B, const GroupStructure& groups,
                        double zero_tol = 1e-9);

/// Indices of the groups counted by group_cardinality, ascending.
std::vector<Index> active_groups(const Eigen::MatrixXd& B, const GroupStructure& groups,
                                 double zero_tol = 1e-9);

/// ||X - X B A^T||_F^2 + lambda psi(B), evaluated through the Gram matrix.
double joint_objective(const Eigen::MatrixXd& gram, double trace_xtx, const Eigen::MatrixXd& A,
                       const Eigen::MatrixXd& B, double lambda, Algorithm algorithm,
                       const Penalty& penalty);

}  // namespace sparsespec

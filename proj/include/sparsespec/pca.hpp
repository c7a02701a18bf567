#pragma once

#include <Eigen/Core>

#include "sparsespec/cube.hpp"

namespace sparsespec {

/// X = U diag(S) V^T with full V (p x p). Columns of V are sign-normalized so
/// that their largest-magnitude entry is positive.
struct PcaDecomposition {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;

  /// First k principal directions.
  Eigen::MatrixXd basis(Index k) const { return V.leftCols(k); }
};

/// SVD-based PCA of a centered matrix.
PcaDecomposition pca(const Eigen::MatrixXd& X);
inline PcaDecomposition pca(const DataMatrix& X) { return pca(X.values); }

/// Column-orthonormal A maximizing tr(M^T A): A = U V^T from the thin SVD of M.
/// Throws DataError for a zero matrix.
Eigen::MatrixXd procrustes(const Eigen::MatrixXd& M);

}  // namespace sparsespec

#include "sparsespec/pca.hpp"

#include <Eigen/SVD>

namespace sparsespec {

namespace {

constexpr Index kJacobiLimit = 48;

template <typename Svd>
PcaDecomposition unpack(const Svd& svd) {
  PcaDecomposition d{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  const Index r = d.S.size();
  for (Index j = 0; j < d.V.cols(); ++j) {
    Index at = 0;
    d.V.col(j).cwiseAbs().maxCoeff(&at);
    if (d.V(at, j) < 0.0) {
      d.V.col(j) *= -1.0;
      if (j < r && j < d.U.cols()) d.U.col(j) *= -1.0;
    }
  }
  return d;
}

}  // namespace

PcaDecomposition pca(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw DataError("pca: NaN or infinite input");
  if (X.size() == 0) throw DataError("pca: empty matrix");
  if (X.cols() <= kJacobiLimit) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeFullV);
    return unpack(svd);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeFullV);
  return unpack(svd);
}

Eigen::MatrixXd procrustes(const Eigen::MatrixXd& M) {
  if (!M.allFinite()) throw DataError("procrustes: NaN or infinite input");
  if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) {
    throw DataError("procrustes: zero matrix has no rotation");
  }
  if (M.cols() <= kJacobiLimit) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace sparsespec

#include "sparsespec/sparse_pca.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fista.hpp"
#include "sparsespec/parallel.hpp"

namespace sparsespec {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSpca: return "spca";
    case Algorithm::kGspca: return "gspca";
    case Algorithm::kJspca: return "jspca";
    case Algorithm::kJgspca: return "jgspca";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "spca") return Algorithm::kSpca;
  if (lower == "gspca") return Algorithm::kGspca;
  if (lower == "jspca") return Algorithm::kJspca;
  if (lower == "jgspca") return Algorithm::kJgspca;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

void AlternationConfig::validate(Index p) const {
  inner.validate();
  if (outer_max <= 0 || !(epsilon > 0.0)) {
    throw std::invalid_argument("alternation configuration values must be positive");
  }
  if (k < 0 || k > p) throw std::invalid_argument("basis width k must satisfy 1 <= k <= p");
}

Penalty penalty_for(Algorithm algorithm, const GroupStructure& groups, bool spca_l0) {
  switch (algorithm) {
    case Algorithm::kSpca: return spca_l0 ? Penalty::l0() : Penalty::l1();
    case Algorithm::kGspca:
    case Algorithm::kJgspca: return Penalty::group_f1(groups);
    case Algorithm::kJspca: return Penalty::row_l21();
  }
  return Penalty::l1();
}

namespace {

double penalty_value(Algorithm algorithm, const Penalty& penalty, const Eigen::MatrixXd& B) {
  if (algorithm != Algorithm::kGspca) return penalty.value(B);
  double total = 0.0;
  for (Index j = 0; j < B.cols(); ++j) total += penalty.value(B.col(j));
  return total;
}

// One B-step of the alternation. GSPCA solves each column as its own problem.
Eigen::MatrixXd solve_b_step(const Eigen::MatrixXd& gram, double lipschitz, const Eigen::MatrixXd& A,
                             double lambda, Algorithm algorithm, const Penalty& penalty,
                             const SolverConfig& config, const Eigen::MatrixXd& start) {
  if (algorithm != Algorithm::kGspca) {
    const Eigen::MatrixXd GA = gram * A;
    return detail::accelerated_prox_gradient(gram, GA, A, lambda, penalty, config, lipschitz, start)
        .B;
  }
  Eigen::MatrixXd B(A.rows(), A.cols());
  const Index k = A.cols();
  parallel_for(k, true, [&](std::ptrdiff_t j) {
    const Eigen::MatrixXd a = A.col(j);
    const Eigen::MatrixXd Ga = gram * a;
    const Eigen::MatrixXd s = start.col(j);
    B.col(j) =
        detail::accelerated_prox_gradient(gram, Ga, a, lambda, penalty, config, lipschitz, s).B;
  });
  return B;
}

double subproblem_objective(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B, double lambda, Algorithm algorithm,
                            const Penalty& penalty) {
  const Eigen::MatrixXd D = A - B;
  return (D.array() * (gram * D).array()).sum() + lambda * penalty_value(algorithm, penalty, B);
}

}  // namespace

double joint_objective(const Eigen::MatrixXd& gram, double trace_xtx, const Eigen::MatrixXd& A,
                       const Eigen::MatrixXd& B, double lambda, Algorithm algorithm,
                       const Penalty& penalty) {
  const Eigen::MatrixXd GB = gram * B;
  const Eigen::MatrixXd BtGB = B.transpose() * GB;
  const Eigen::MatrixXd AtA = A.transpose() * A;
  const double loss = trace_xtx - 2.0 * (A.array() * GB.array()).sum() + (BtGB.array() * AtA.array()).sum();
  return loss + lambda * penalty_value(algorithm, penalty, B);
}

SparseBasis fit(const DataMatrix& X, Algorithm algorithm, double lambda,
                const AlternationConfig& config) {
  return fit(X, pca(X.values), algorithm, lambda, config);
}

SparseBasis fit(const DataMatrix& X, const PcaDecomposition& decomposition, Algorithm algorithm,
                double lambda, const AlternationConfig& config) {
  const Index p = X.cols();
  config.validate(p);
  X.groups.validate(p);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!X.values.allFinite()) throw DataError("fit: NaN or infinite input");
  const Index k = config.width(p);

  const Penalty penalty = penalty_for(algorithm, X.groups, config.spca_l0);
  const Eigen::MatrixXd gram = X.values.transpose() * X.values;
  const double trace_xtx = gram.trace();
  const double gram_norm = trace_xtx > 0.0 ? gram_spectral_norm(gram, config.inner) : 0.0;
  const double lipschitz = 2.0 * config.inner.lipschitz_inflation * gram_norm;

  SparseBasis out;
  out.algorithm = algorithm;
  out.lambda = lambda;
  out.groups = X.groups;
  out.column_mean = X.column_mean;

  Eigen::MatrixXd A = decomposition.basis(k);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, k);
  out.objective_history.push_back(
      joint_objective(gram, trace_xtx, A, B, lambda, algorithm, penalty));

  // Start the first B-step from whichever of {0, A} scores better.
  Eigen::MatrixXd start =
      subproblem_objective(gram, A, A, lambda, algorithm, penalty) <
              subproblem_objective(gram, A, B, lambda, algorithm, penalty)
          ? A
          : B;

  for (int step = 1; step <= config.outer_max; ++step) {
    out.iterations_used = step;
    Eigen::MatrixXd B_hat =
        solve_b_step(gram, lipschitz, A, lambda, algorithm, penalty, config.inner, start);

    if (B_hat.cwiseAbs().maxCoeff() == 0.0) {
      // A is unidentifiable once B vanishes; return the zero model.
      B = std::move(B_hat);
      out.objective_history.push_back(
          joint_objective(gram, trace_xtx, A, B, lambda, algorithm, penalty));
      out.converged = true;
      break;
    }

    Eigen::MatrixXd A_hat = procrustes(gram * B_hat);
    out.orthonormality_history.push_back(orthonormality_error(A_hat));
    out.objective_history.push_back(
        joint_objective(gram, trace_xtx, A_hat, B_hat, lambda, algorithm, penalty));

    const double change = (B - B_hat).norm();
    A = std::move(A_hat);
    B = std::move(B_hat);
    if (change < config.epsilon) {
      out.converged = true;
      break;
    }
    start = B;
  }
  out.A = std::move(A);
  out.B = std::move(B);
  return out;
}

// ---------------------------------------------------------------------------

double lambda_max(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A0, const Penalty& penalty,
                  const SolverConfig& config) {
  if (A0.rows() != X.cols()) throw DataError("lambda_max: basis rows do not match data columns");
  penalty.validate(X.cols());
  const Eigen::MatrixXd gram = X.transpose() * X;
  if (gram.size() == 0 || gram.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Eigen::MatrixXd C = gram * A0;

  double best = 0.0;
  switch (penalty.kind) {
    case PenaltyKind::kL1:
      for (Index i = 0; i < C.rows(); ++i)
        best = std::max(best, 2.0 * C.row(i).cwiseAbs().maxCoeff() / penalty.row_weight(i));
      break;
    case PenaltyKind::kL0: {
      const double lipschitz = 2.0 * config.lipschitz_inflation * gram_spectral_norm(gram, config);
      // Stationarity of the hard-threshold step at 0: (2C/L)^2 <= 2 lambda w / L.
      for (Index i = 0; i < C.rows(); ++i)
        best = std::max(best, 2.0 * C.row(i).cwiseAbs2().maxCoeff() /
                                  (lipschitz * penalty.row_weight(i)));
      break;
    }
    case PenaltyKind::kRowL21:
      for (Index i = 0; i < C.rows(); ++i)
        best = std::max(best, 2.0 * C.row(i).norm() / penalty.row_weight(i));
      break;
    case PenaltyKind::kGroupF1:
      for (Index g = 0; g < penalty.groups.num_groups(); ++g) {
        double sq = 0.0;
        for (Index r : penalty.groups.group(g)) sq += C.row(r).squaredNorm();
        best = std::max(best, 2.0 * std::sqrt(sq) / penalty.groups.weight(g));
      }
      break;
  }
  return best;
}

double lambda_max(const DataMatrix& X, Algorithm algorithm, const AlternationConfig& config) {
  return lambda_max(X, pca(X.values), algorithm, config);
}

double lambda_max(const DataMatrix& X, const PcaDecomposition& decomposition, Algorithm algorithm,
                  const AlternationConfig& config) {
  const Index p = X.cols();
  config.validate(p);
  const Eigen::MatrixXd A0 = decomposition.basis(config.width(p));
  const Penalty penalty = penalty_for(algorithm, X.groups, config.spca_l0);
  if (algorithm != Algorithm::kGspca) return lambda_max(X.values, A0, penalty, config.inner);
  double best = 0.0;
  for (Index j = 0; j < A0.cols(); ++j)
    best = std::max(best, lambda_max(X.values, A0.col(j), penalty, config.inner));
  return best;
}

Index group_cardinality(const Eigen::MatrixXd& B, const GroupStructure& groups, double zero_tol) {
  return static_cast<Index>(active_groups(B, groups, zero_tol).size());
}

std::vector<Index> active_groups(const Eigen::MatrixXd& B, const GroupStructure& groups,
                                 double zero_tol) {
  groups.validate(B.rows());
  const double threshold = zero_tol * (1.0 + B.norm());
  std::vector<Index> active;
  for (Index g = 0; g < groups.num_groups(); ++g) {
    double sq = 0.0;
    for (Index r : groups.group(g)) sq += B.row(r).squaredNorm();
    if (std::sqrt(sq) > threshold) active.push_back(g);
  }
  return active;
}

}  // namespace sparsespec

#include "sparsespec/prox.hpp"
#include "fista.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sparsespec {

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kL1: return "l1";
    case PenaltyKind::kL0: return "l0";
    case PenaltyKind::kRowL21: return "row-l21";
    case PenaltyKind::kGroupF1: return "group-f1";
  }
  return "unknown";
}

void Penalty::validate(Index p) const {
  if (kind == PenaltyKind::kGroupF1) {
    groups.validate(p);
    return;
  }
  if (!row_weights.empty()) {
    if (static_cast<Index>(row_weights.size()) != p) {
      throw DataError("penalty has " + std::to_string(row_weights.size()) +
                      " row weights, expected " + std::to_string(p));
    }
    for (double w : row_weights)
      if (!(w > 0.0)) throw DataError("penalty weights must be positive");
  }
}

double Penalty::value(const Eigen::MatrixXd& B) const {
  double total = 0.0;
  switch (kind) {
    case PenaltyKind::kL1:
      for (Index i = 0; i < B.rows(); ++i) total += row_weight(i) * B.row(i).cwiseAbs().sum();
      break;
    case PenaltyKind::kL0:
      for (Index i = 0; i < B.rows(); ++i)
        total += row_weight(i) * static_cast<double>((B.row(i).array() != 0.0).count());
      break;
    case PenaltyKind::kRowL21:
      for (Index i = 0; i < B.rows(); ++i) total += row_weight(i) * B.row(i).norm();
      break;
    case PenaltyKind::kGroupF1:
      for (Index g = 0; g < groups.num_groups(); ++g) {
        double sq = 0.0;
        for (Index r : groups.group(g)) sq += B.row(r).squaredNorm();
        total += groups.weight(g) * std::sqrt(sq);
      }
      break;
  }
  return total;
}

Eigen::MatrixXd prox(const Eigen::MatrixXd& Z, double tau, const Penalty& penalty) {
  if (!(tau >= 0.0)) throw std::invalid_argument("prox: tau must be non-negative");
  Eigen::MatrixXd B = Z;
  if (tau == 0.0) return B;

  switch (penalty.kind) {
    case PenaltyKind::kL1:
      for (Index i = 0; i < B.rows(); ++i) {
        const double t = tau * penalty.row_weight(i);
        for (Index j = 0; j < B.cols(); ++j) {
          const double z = Z(i, j);
          B(i, j) = z > t ? z - t : (z < -t ? z + t : 0.0);
        }
      }
      break;
    case PenaltyKind::kL0:
      for (Index i = 0; i < B.rows(); ++i) {
        const double t = 2.0 * tau * penalty.row_weight(i);
        for (Index j = 0; j < B.cols(); ++j)
          if (!(Z(i, j) * Z(i, j) > t)) B(i, j) = 0.0;
      }
      break;
    case PenaltyKind::kRowL21:
      for (Index i = 0; i < B.rows(); ++i) {
        const double norm = Z.row(i).norm();
        const double t = tau * penalty.row_weight(i);
        if (norm <= t) {
          B.row(i).setZero();
        } else {
          B.row(i) *= 1.0 - t / norm;
        }
      }
      break;
    case PenaltyKind::kGroupF1: {
      const auto& groups = penalty.groups;
      for (Index g = 0; g < groups.num_groups(); ++g) {
        double sq = 0.0;
        for (Index r : groups.group(g)) sq += Z.row(r).squaredNorm();
        const double norm = std::sqrt(sq);
        const double t = tau * groups.weight(g);
        const double scale = norm <= t ? 0.0 : 1.0 - t / norm;
        for (Index r : groups.group(g)) B.row(r) = scale * Z.row(r);
      }
      break;
    }
  }
  return B;
}

void SolverConfig::validate() const {
  if (max_iters <= 0 || !(rel_tol > 0.0) || lipschitz_power_iters <= 0 || !(lipschitz_tol > 0.0) ||
      !(lipschitz_inflation >= 1.0)) {
    throw std::invalid_argument("solver configuration values must be positive");
  }
}

double gram_spectral_norm(const Eigen::MatrixXd& gram, const SolverConfig& config) {
  const Index p = gram.rows();
  if (p == 0) throw DataError("empty matrix");
  // Start from the diagonal: permutation-equivariant, and nonnegative so it
  // is rarely orthogonal to the leading eigenvector.
  Eigen::VectorXd v = gram.diagonal();
  if (v.norm() == 0.0) throw DataError("all-zero matrix has no spectral norm");
  v.normalize();
  Eigen::VectorXd w = gram * v;
  if (w.norm() == 0.0) {
    Index best = 0;
    gram.diagonal().maxCoeff(&best);
    v.setZero();
    v(best) = 1.0;
    w = gram * v;
  }
  double estimate = v.dot(w);
  for (int it = 0; it < config.lipschitz_power_iters; ++it) {
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
    w.noalias() = gram * v;
    const double next = v.dot(w);
    const bool done = std::abs(next - estimate) <= config.lipschitz_tol * std::abs(next);
    estimate = next;
    if (done) break;
  }
  return estimate;
}

double spectral_norm_sq(const Eigen::MatrixXd& X, const SolverConfig& config) {
  if (X.size() == 0 || X.cwiseAbs().maxCoeff() == 0.0) {
    throw DataError("all-zero matrix has no spectral norm");
  }
  const Eigen::MatrixXd gram = X.transpose() * X;
  return gram_spectral_norm(gram, config);
}

double orthonormality_error(const Eigen::MatrixXd& A) {
  return (A.transpose() * A - Eigen::MatrixXd::Identity(A.cols(), A.cols())).norm();
}

// ---------------------------------------------------------------------------

namespace {

double gram_norm_or_zero(const Eigen::MatrixXd& gram, const SolverConfig& config) {
  if (gram.size() == 0 || gram.diagonal().maxCoeff() <= 0.0) return 0.0;
  return gram_spectral_norm(gram, config);
}

}  // namespace

BSubproblem::BSubproblem(Eigen::MatrixXd gram, Eigen::MatrixXd A, double lambda, Penalty penalty,
                         SolverConfig config)
    : BSubproblem(gram, std::move(A), lambda, std::move(penalty), config,
                  gram_norm_or_zero(gram, config)) {}

BSubproblem::BSubproblem(Eigen::MatrixXd gram, Eigen::MatrixXd A, double lambda, Penalty penalty,
                         SolverConfig config, double gram_norm)
    : gram_(std::move(gram)),
      A_(std::move(A)),
      lambda_(lambda),
      penalty_(std::move(penalty)),
      config_(config) {
  config_.validate();
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (gram_.rows() != gram_.cols() || gram_.rows() != A_.rows()) {
    throw DataError("basis has " + std::to_string(A_.rows()) + " rows, data has " +
                    std::to_string(gram_.cols()) + " features");
  }
  penalty_.validate(A_.rows());
  GA_ = gram_ * A_;
  lipschitz_ = 2.0 * config_.lipschitz_inflation * gram_norm;
}

double BSubproblem::loss(const Eigen::MatrixXd& B) const {
  return detail::subproblem_loss(A_, GA_, B, gram_ * B);
}

SolveResult BSubproblem::solve(const Eigen::MatrixXd& start) const {
  if (start.rows() != A_.rows() || start.cols() != A_.cols()) {
    throw DataError("warm start has the wrong shape");
  }
  return detail::accelerated_prox_gradient(gram_, GA_, A_, lambda_, penalty_, config_, lipschitz_,
                                           start);
}

namespace detail {

double subproblem_loss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& GA,
                       const Eigen::MatrixXd& B, const Eigen::MatrixXd& GB) {
  // tr((A-B)^T G (A-B)) written with the products G A and G B
  return ((A - B).array() * (GA - GB).array()).sum();
}

SolveResult accelerated_prox_gradient(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& GA,
                                      const Eigen::MatrixXd& A, double lambda,
                                      const Penalty& penalty, const SolverConfig& config,
                                      double lipschitz, const Eigen::MatrixXd& start) {
  SolveResult res;
  if (lipschitz == 0.0) {
    // Zero data: the loss vanishes identically.
    res.B = lambda > 0.0 ? Eigen::MatrixXd::Zero(A.rows(), A.cols()) : start;
    res.objective = lambda * penalty.value(res.B);
    res.objective_history = {lambda * penalty.value(start), res.objective};
    res.converged = true;
    return res;
  }

  const double step = 1.0 / lipschitz;
  const double tau = lambda * step;
  auto objective = [&](const Eigen::MatrixXd& B, const Eigen::MatrixXd& GB) {
    return subproblem_loss(A, GA, B, GB) + lambda * penalty.value(B);
  };

  Eigen::MatrixXd x = start;
  Eigen::MatrixXd Gx = gram * x;
  double fx = objective(x, Gx);
  res.objective_history.push_back(fx);

  Eigen::MatrixXd y = x;
  Eigen::MatrixXd Gy = Gx;
  bool y_is_x = true;
  double t = 1.0;

  Eigen::MatrixXd z;
  Eigen::MatrixXd Gz;
  for (int it = 1; it <= config.max_iters; ++it) {
    res.iterations = it;
    z = prox(y - (2.0 * step) * (Gy - GA), tau, penalty);
    Gz.noalias() = gram * z;
    double fz = objective(z, Gz);

    if (fz > fx) {
      ++res.restarts;
      if (!y_is_x) {
        z = prox(x - (2.0 * step) * (Gx - GA), tau, penalty);
        Gz.noalias() = gram * z;
        fz = objective(z, Gz);
      }
      if (fz > fx) {
        // Rounding-level stall: no descent available from x.
        res.converged = true;
        break;
      }
      t = 1.0;
      y = z;
      Gy = Gz;
      y_is_x = true;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      y = z + beta * (z - x);
      Gy = Gz + beta * (Gz - Gx);
      y_is_x = beta == 0.0;
      t = t_next;
    }

    const double change = (z - x).norm();
    x.swap(z);
    Gx.swap(Gz);
    fx = fz;
    res.objective_history.push_back(fx);
    if (change <= config.rel_tol * (1.0 + x.norm())) {
      res.converged = true;
      break;
    }
  }
  res.B = std::move(x);
  res.objective = fx;
  return res;
}

}  // namespace detail

SolveResult solve_B(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A, double lambda,
                    const Penalty& penalty, const SolverConfig& config,
                    const std::optional<Eigen::MatrixXd>& warm_start) {
  if (!X.allFinite() || !A.allFinite()) throw DataError("solve_B: NaN or infinite input");
  if (A.rows() != X.cols()) throw DataError("solve_B: basis rows do not match data columns");
  if (orthonormality_error(A) >= 1e-8) throw DataError("solve_B: A is not orthonormal");
  BSubproblem problem(X.transpose() * X, A, lambda, penalty, config);
  return problem.solve(warm_start ? *warm_start : Eigen::MatrixXd::Zero(A.rows(), A.cols()));
}

}  // namespace sparsespec

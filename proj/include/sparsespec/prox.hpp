#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"

namespace sparsespec {

enum class PenaltyKind {
  kL1,       // sum_ij w_i |B_ij|
  kL0,       // sum_ij w_i [B_ij != 0]
  kRowL21,   // sum_i w_i ||B_i.||_2
  kGroupF1,  // sum_g eta_g ||B^{G_g}||_F
};

std::string_view to_string(PenaltyKind kind);

/// A sparsity penalty psi(B) on a p x k coefficient matrix.
///
/// Elementwise and row penalties take one weight per row (empty means all 1).
/// The group penalty takes its weights from the group structure.
struct Penalty {
  PenaltyKind kind = PenaltyKind::kL1;
  GroupStructure groups;
  std::vector<double> row_weights;

  static Penalty l1() { return {PenaltyKind::kL1, {}, {}}; }
  static Penalty l0() { return {PenaltyKind::kL0, {}, {}}; }
  static Penalty row_l21(std::vector<double> weights = {}) {
    return {PenaltyKind::kRowL21, {}, std::move(weights)};
  }
  static Penalty group_f1(GroupStructure groups) {
    return {PenaltyKind::kGroupF1, std::move(groups), {}};
  }

  bool convex() const { return kind != PenaltyKind::kL0; }
  double row_weight(Index i) const {
    return row_weights.empty() ? 1.0 : row_weights[static_cast<std::size_t>(i)];
  }

  /// Throws DataError if the penalty cannot act on matrices with p rows.
  void validate(Index p) const;

  /// psi(B).
  double value(const Eigen::MatrixXd& B) const;
};

/// argmin_B 0.5 ||Z - B||_F^2 + tau * psi(B).
Eigen::MatrixXd prox(const Eigen::MatrixXd& Z, double tau, const Penalty& penalty);

struct SolverConfig {
  int max_iters = 500;
  double rel_tol = 1e-7;
  int lipschitz_power_iters = 100;
  double lipschitz_tol = 1e-7;
  /// Multiplier applied to the power-iteration estimate before taking 1/L steps.
  double lipschitz_inflation = 1.01;

  void validate() const;
};

/// ||X||_2^2 by power iteration on X^T X.
double spectral_norm_sq(const Eigen::MatrixXd& X, const SolverConfig& config = {});

/// Same, for a precomputed symmetric positive semidefinite Gram matrix X^T X.
double gram_spectral_norm(const Eigen::MatrixXd& gram, const SolverConfig& config = {});

struct SolveResult {
  Eigen::MatrixXd B;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts = 0;
  /// Objective at the starting point and after every accepted iterate.
  std::vector<double> objective_history;
};

/// The B-subproblem  min_B ||XA - XB||_F^2 + lambda * psi(B)  expressed through
/// the Gram matrix G = X^T X, so that ||X(A - B)||_F^2 = tr((A-B)^T G (A-B)).
class BSubproblem {
 public:
  BSubproblem(Eigen::MatrixXd gram, Eigen::MatrixXd A, double lambda, Penalty penalty,
              SolverConfig config = {});

  /// Variant that reuses a known ||G||_2 (avoids repeated power iterations).
  BSubproblem(Eigen::MatrixXd gram, Eigen::MatrixXd A, double lambda, Penalty penalty,
              SolverConfig config, double gram_norm);

  double loss(const Eigen::MatrixXd& B) const;
  double objective(const Eigen::MatrixXd& B) const { return loss(B) + lambda_ * penalty_.value(B); }

  /// Accelerated proximal gradient with monotone restart, starting from `start`.
  SolveResult solve(const Eigen::MatrixXd& start) const;

  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& A() const { return A_; }
  double lipschitz() const { return lipschitz_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd GA_;
  double lambda_;
  Penalty penalty_;
  SolverConfig config_;
  double lipschitz_ = 0.0;
};

/// Solves the B-subproblem for a data matrix and orthonormal A, starting
/// from B = 0 unless a warm start is given.
SolveResult solve_B(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A, double lambda,
                    const Penalty& penalty, const SolverConfig& config = {},
                    const std::optional<Eigen::MatrixXd>& warm_start = std::nullopt);

/// ||A^T A - I||_F.
double orthonormality_error(const Eigen::MatrixXd& A);

}  // namespace sparsespec

#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "sparsespec/sparse_pca.hpp"

namespace sparsespec {

enum class Spacing { kLog, kLinear };

std::string_view to_string(Spacing spacing);
Spacing parse_spacing(std::string_view name);

struct TreeConfig {
  int depth = 5;
  int roots = 4;
  /// Path endpoints. Defaults: lambda_max(X) at the PCA start and 1e-4 of it.
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  Spacing spacing = Spacing::kLog;
  AlternationConfig fit;
  double zero_tol = 1e-9;

  void validate() const;
};

/// A fitted model with the group cardinality it achieved and where in the
/// tree it came from (1-based level, 0-based index within the level).
struct ModelRecord {
  SparseBasis basis;
  Index cardinality = 0;
  double lambda = 0.0;
  int level = 0;
  int index = 0;
};

enum class NodeStatus {
  kFitted,       // model computed at this node
  kReplicated,   // parent carried down from the previous level
  kSkipped,      // child between parents whose cardinalities differ by <= 1
  kDeactivated,  // follows a node that already reached r = g on this level
};

std::string_view to_string(NodeStatus status);

struct TreeNode {
  int level = 0;
  int index = 0;
  double lambda = 0.0;
  NodeStatus status = NodeStatus::kSkipped;
  /// Cardinality recorded for the node (inherited when it was not fitted).
  Index cardinality = 0;
};

struct TreeSearchResult {
  std::map<Index, ModelRecord> models;
  /// Every node of every explored level, level by level in decreasing lambda.
  std::vector<TreeNode> nodes;
  /// Cardinalities in 1..g with no model.
  std::vector<Index> missing;
  int fitted_nodes = 0;
  int levels_explored = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Index num_groups = 0;
};

/// Explores the regularization path level by level. Each level keeps the
/// previous level's nodes and inserts one child between every consecutive
/// pair, fitting the child only if the pair's cardinalities differ by more
/// than one. Nodes of a level are fitted concurrently.
TreeSearchResult tree_search(const DataMatrix& X, Algorithm algorithm, const TreeConfig& config = {});

/// Single-threaded reference that fits nodes one at a time in order.
TreeSearchResult tree_search_serial(const DataMatrix& X, Algorithm algorithm,
                                    const TreeConfig& config = {});

/// Lambda values of the level-1 nodes, from lambda_max down to lambda_min.
std::vector<double> root_lambdas(double lambda_min, double lambda_max, int roots, Spacing spacing);

/// Midpoint of two lambdas in the spacing domain.
double child_lambda(double a, double b, Spacing spacing);

struct ModelLookup {
  const ModelRecord* record = nullptr;
  bool exact = false;
};

/// The record for cardinality r, or the one with the nearest cardinality
/// (ties go to the smaller r) flagged inexact. Throws DataError when empty.
ModelLookup model_for(const std::map<Index, ModelRecord>& models, Index r);

}  // namespace sparsespec

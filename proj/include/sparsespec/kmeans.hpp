#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"

namespace sparsespec {

struct KMeansConfig {
  int restarts = 10;
  int max_iters = 300;
  /// Lloyd stops once the relative inertia decrease falls to or below tol.
  double tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ClusterResult {
  /// Cluster of each row, 1..g.
  std::vector<int> labels;
  /// g x q centroids; row c-1 belongs to label c.
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  /// Seed of the winning restart.
  std::uint64_t seed = 0;
  int restart = 0;
  int iterations = 0;
  /// Inertia after every centroid update of the winning restart.
  std::vector<double> inertia_history;
};

/// Seed used by restart `index` of a run seeded with `seed`.
std::uint64_t restart_seed(std::uint64_t seed, int index);

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// (inertia, restart seed) wins. Restarts run concurrently.
ClusterResult kmeans(const Eigen::MatrixXd& X, int g, const KMeansConfig& config = {});

/// Same result computed one restart after another on a single thread.
ClusterResult kmeans_serial(const Eigen::MatrixXd& X, int g, const KMeansConfig& config = {});

/// One seeded restart.
ClusterResult kmeans_single(const Eigen::MatrixXd& X, int g, std::uint64_t seed, int max_iters,
                            double tol);

/// sum_i ||x_i - c_{label_i}||^2.
double clustering_inertia(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                          const Eigen::MatrixXd& centroids);

}  // namespace sparsespec

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sparsespec/kmeans.hpp"

using namespace sparsespec;

namespace {

Eigen::MatrixXd blobs(Index per, Index dims, double gap, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd X = oracle::gaussian(2 * per, dims, rng, sigma);
  X.bottomRows(per).col(0).array() += gap;
  return X;
}

}  // namespace

TEST(KMeans, SingleClusterIsTheMean) {
  const Eigen::MatrixXd X = blobs(10, 3, 1.0, 0.5, 1);
  const ClusterResult r = kmeans(X, 1);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  EXPECT_LT((r.centroids.row(0) - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.inertia, (X.rowwise() - mean).squaredNorm(), 1e-10);
  for (int l : r.labels) EXPECT_EQ(l, 1);
}

TEST(KMeans, TwoPointsTwoClusters) {
  Eigen::MatrixXd X(2, 2);
  X << 0.0, 0.0, 1.0, 1.0;
  const ClusterResult r = kmeans(X, 2);
  EXPECT_EQ(r.inertia, 0.0);
  EXPECT_NE(r.labels[0], r.labels[1]);
}

TEST(KMeans, MatchesExhaustivePartitionSearch) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd X = blobs(6, 2, 1.0, 0.01, seed);
    const double oracle_inertia = oracle::best_partition_inertia(X, 2);
    EXPECT_NEAR(kmeans(X, 2).inertia, oracle_inertia, 1e-9);
  }
}

TEST(KMeans, ThreeClustersMatchExhaustiveSearch) {
  std::mt19937_64 rng(9);
  Eigen::MatrixXd X = oracle::gaussian(9, 2, rng, 0.05);
  X.middleRows(3, 3).col(0).array() += 1.0;
  X.bottomRows(3).col(1).array() += 1.0;
  EXPECT_NEAR(kmeans(X, 3).inertia, oracle::best_partition_inertia(X, 3), 1e-9);
}

TEST(KMeans, ParallelMatchesSerial) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Eigen::MatrixXd X = blobs(40, 4, 0.3, 0.5, seed);
    KMeansConfig cfg;
    cfg.seed = seed;
    const ClusterResult a = kmeans(X, 3, cfg);
    const ClusterResult b = kmeans_serial(X, 3, cfg);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.inertia, b.inertia);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.centroids, b.centroids);
  }
}

TEST(KMeans, WinnerHasLowestInertiaAmongRestarts) {
  const Eigen::MatrixXd X = blobs(30, 3, 0.2, 0.5, 7);
  KMeansConfig cfg;
  cfg.seed = 11;
  const ClusterResult best = kmeans(X, 4, cfg);
  for (int r = 0; r < cfg.restarts; ++r) {
    const ClusterResult one = kmeans_single(X, 4, restart_seed(cfg.seed, r), cfg.max_iters, cfg.tol);
    EXPECT_LE(best.inertia, one.inertia);
  }
  EXPECT_EQ(best.seed, restart_seed(cfg.seed, best.restart));
}

TEST(KMeans, InertiaNonIncreasingWithinRestart) {
  const Eigen::MatrixXd X = blobs(50, 3, 0.1, 1.0, 3);
  for (int r = 0; r < 5; ++r) {
    const ClusterResult one = kmeans_single(X, 5, restart_seed(0, r), 300, 0.0);
    for (std::size_t i = 1; i < one.inertia_history.size(); ++i)
      EXPECT_LE(one.inertia_history[i], one.inertia_history[i - 1] * (1.0 + 1e-12));
    EXPECT_NEAR(one.inertia, clustering_inertia(X, one.labels, one.centroids), 1e-9);
  }
}

TEST(KMeans, DeterministicForSeed) {
  const Eigen::MatrixXd X = blobs(30, 3, 0.5, 0.5, 4);
  KMeansConfig cfg;
  cfg.seed = 5;
  EXPECT_EQ(kmeans(X, 3, cfg).labels, kmeans(X, 3, cfg).labels);
}

TEST(KMeans, DuplicatePointsKeepClustersNonEmpty) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(6, 2);
  X.bottomRows(1).setOnes();
  const ClusterResult r = kmeans(X, 3);
  std::vector<int> count(3, 0);
  for (int l : r.labels) ++count[static_cast<std::size_t>(l - 1)];
  for (int c : count) EXPECT_GT(c, 0);
}

TEST(KMeans, Errors) {
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Zero(2, 2), 3), DataError);
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Zero(2, 2), 0), std::invalid_argument);
  KMeansConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Zero(4, 2), 2, cfg), std::invalid_argument);
}

TEST(RestartSeed, DistinctAndStable) {
  EXPECT_NE(restart_seed(0, 0), restart_seed(0, 1));
  EXPECT_NE(restart_seed(0, 0), restart_seed(1, 0));
  EXPECT_EQ(restart_seed(42, 3), restart_seed(42, 3));
}

#include "sparsespec/kmeans.hpp"

#include <limits>
#include <random>
#include <stdexcept>
#include <tuple>

#include "sparsespec/parallel.hpp"

namespace sparsespec {

void KMeansConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("kmeans needs at least one restart");
  if (max_iters < 1) throw std::invalid_argument("kmeans max_iters must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("kmeans tol must be non-negative");
}

std::uint64_t restart_seed(std::uint64_t seed, int index) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double clustering_inertia(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                          const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Index i = 0; i < X.rows(); ++i)
    total += (X.row(i) - centroids.row(labels[static_cast<std::size_t>(i)] - 1)).squaredNorm();
  return total;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_input(const Eigen::MatrixXd& X, int g) {
  if (g < 1) throw std::invalid_argument("kmeans: g must be positive");
  if (X.rows() < g) throw DataError("kmeans: fewer rows than clusters");
  if (!X.allFinite()) throw DataError("kmeans: NaN or infinite input");
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& X, int g, std::mt19937_64& rng) {
  const Index n = X.rows();
  Eigen::MatrixXd centers(g, X.cols());
  Index first = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
  if (first >= n) first = n - 1;
  centers.row(0) = X.row(first);
  Eigen::VectorXd d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < g; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
      if (pick >= n) pick = n - 1;
    }
    centers.row(c) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

// Nearest centroid per row; ties go to the lower label.
std::vector<int> assign(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centers) {
  std::vector<int> labels(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (X.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best + 1;
  }
  return labels;
}

// Cluster means. An empty cluster takes the point farthest from its current
// centroid among clusters that can spare one.
Eigen::MatrixXd update(const Eigen::MatrixXd& X, std::vector<int>& labels,
                       const Eigen::MatrixXd& centers) {
  const Index g = centers.rows();
  std::vector<Index> counts(static_cast<std::size_t>(g), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l - 1)];
  for (Index c = 0; c < g; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < X.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(l - 1)] < 2) continue;
      const double d = (X.row(i) - centers.row(l - 1)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)] - 1)];
    labels[static_cast<std::size_t>(far)] = static_cast<int>(c) + 1;
    counts[static_cast<std::size_t>(c)] = 1;
  }
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(g, X.cols());
  for (Index i = 0; i < X.rows(); ++i) means.row(labels[static_cast<std::size_t>(i)] - 1) += X.row(i);
  for (Index c = 0; c < g; ++c) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  return means;
}

bool better(const ClusterResult& a, const ClusterResult& b) {
  return std::tie(a.inertia, a.seed) < std::tie(b.inertia, b.seed);
}

}  // namespace

ClusterResult kmeans_single(const Eigen::MatrixXd& X, int g, std::uint64_t seed, int max_iters,
                            double tol) {
  check_input(X, g);
  std::mt19937_64 rng(seed);
  ClusterResult out;
  out.seed = seed;
  Eigen::MatrixXd centers = plus_plus_seeds(X, g, rng);
  std::vector<int> labels = assign(X, centers);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    out.iterations = it;
    centers = update(X, labels, centers);
    const double inertia = clustering_inertia(X, labels, centers);
    out.inertia_history.push_back(inertia);
    std::vector<int> next = assign(X, centers);
    const bool stable = next == labels;
    const bool flat = previous - inertia <= tol * inertia;
    previous = inertia;
    if (stable || flat) break;
    labels = std::move(next);
  }
  out.labels = std::move(labels);
  out.centroids = std::move(centers);
  out.inertia = out.inertia_history.back();
  return out;
}

ClusterResult kmeans_serial(const Eigen::MatrixXd& X, int g, const KMeansConfig& config) {
  config.validate();
  check_input(X, g);
  ClusterResult best;
  for (int r = 0; r < config.restarts; ++r) {
    ClusterResult run = kmeans_single(X, g, restart_seed(config.seed, r), config.max_iters, config.tol);
    run.restart = r;
    if (r == 0 || better(run, best)) best = std::move(run);
  }
  return best;
}

ClusterResult kmeans(const Eigen::MatrixXd& X, int g, const KMeansConfig& config) {
  config.validate();
  check_input(X, g);
  std::vector<ClusterResult> runs(static_cast<std::size_t>(config.restarts));
  parallel_for(config.restarts, true, [&](std::ptrdiff_t r) {
    auto& run = runs[static_cast<std::size_t>(r)];
    run = kmeans_single(X, g, restart_seed(config.seed, static_cast<int>(r)), config.max_iters,
                        config.tol);
    run.restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (better(runs[r], runs[best])) best = r;
  return std::move(runs[best]);
}

}  // namespace sparsespec

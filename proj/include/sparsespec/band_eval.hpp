#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"
#include "sparsespec/kmeans.hpp"
#include "sparsespec/model_search.hpp"
#include "sparsespec/sparse_pca.hpp"

namespace sparsespec {

enum class BandSource { kSfbs, kJsbs, kManual };
std::string_view to_string(BandSource source);

struct BandSet {
  /// 0-based band indices, unique and ascending.
  std::vector<Index> indices;
  BandSource source = BandSource::kManual;
  double accuracy = 0.0;
};

/// Subtracts training column means from raw rows.
Eigen::MatrixXd center_with(const Eigen::MatrixXd& raw, const Eigen::VectorXd& column_mean);

/// Raw rows -> center with the basis' training means -> zero the columns of
/// inactive groups -> X B A^T -> add the means back.
Eigen::MatrixXd reconstruct_rows(const Eigen::MatrixXd& raw, const SparseBasis& basis,
                                 double zero_tol = 1e-9);

/// e_r = ||X V V^T - X B A^T||_F / ||X V V^T||_F for centered X. With no V
/// the projection is the identity (k = p).
double reconstruction_error(const Eigen::MatrixXd& X_centered, const SparseBasis& basis,
                            const std::optional<Eigen::MatrixXd>& V = std::nullopt);

/// Reconstructs a cube from the bands of the active groups only.
HyperspectralCube reconstruct_cube(const HyperspectralCube& cube, const SparseBasis& basis,
                                   Index side, double zero_tol = 1e-9);

/// Nearest-neighbour accuracy of probes reconstructed through `basis` against
/// the raw gallery. Ties go to the lowest gallery row.
double knn_recognition(const Eigen::MatrixXd& gallery, const std::vector<int>& gallery_labels,
                       const Eigen::MatrixXd& probes, const std::vector<int>& probe_labels,
                       const SparseBasis& basis);

/// Single-threaded variant of knn_recognition.
double knn_recognition_serial(const Eigen::MatrixXd& gallery, const std::vector<int>& gallery_labels,
                              const Eigen::MatrixXd& probes, const std::vector<int>& probe_labels,
                              const SparseBasis& basis);

/// Index of the nearest gallery row of every query (ties: lowest index).
std::vector<Index> nearest_rows(const Eigen::MatrixXd& gallery, const Eigen::MatrixXd& queries);

struct CurvePoint {
  Index r = 0;
  double lambda = 0.0;
  double value = 0.0;
};

/// e_r for every model of a tree search, ascending in r.
std::vector<CurvePoint> error_curve(const std::map<Index, ModelRecord>& models,
                                    const Eigen::MatrixXd& X_test_raw);

/// Scores a band subset of the spectra (accuracy in [0, 1]).
using SubsetScorer = std::function<double(const LabeledSpectra&, const std::vector<Index>&)>;

/// k-means on the selected bands scored by the mismatch accuracy.
struct ClusteringAccuracy {
  int g = 2;
  KMeansConfig kmeans;
  double operator()(const LabeledSpectra& spectra, const std::vector<Index>& bands) const;
};

struct SfbsStep {
  Index band = 0;
  double accuracy = 0.0;
};

struct SfbsResult {
  BandSet bands;
  /// Accepted steps; accuracies are strictly increasing.
  std::vector<SfbsStep> trace;
  /// Best accuracy of the rejected step that ended the search, if any.
  std::optional<double> rejected_accuracy;
};

/// Greedy forward selection: add the band that scores best together with the
/// current set (ties: lowest band) while that strictly improves the score.
SfbsResult sfbs(const LabeledSpectra& spectra, const SubsetScorer& score);

struct JsbsConfig {
  AlternationConfig fit;
  /// Largest reduced set that is searched exhaustively.
  Index max_reduced = 16;
  double zero_tol = 1e-9;
};

struct JsbsResult {
  BandSet bands;
  /// Bands with nonzero rows in the JSPCA basis.
  std::vector<Index> reduced;
  std::size_t subsets_evaluated = 0;
};

/// Joint sparse band selection: JSPCA at lambda picks a reduced set R, then
/// every non-empty subset of R is scored. Ties: fewer bands, then
/// lexicographically smaller.
JsbsResult jsbs(const LabeledSpectra& spectra, double lambda, const SubsetScorer& score,
                const JsbsConfig& config = {});

/// Subset enumeration step of jsbs on a given reduced set.
JsbsResult best_subset(const LabeledSpectra& spectra, const std::vector<Index>& reduced,
                       const SubsetScorer& score, bool parallel = true);

/// Reduced set of jsbs: rows of the JSPCA basis that survive at lambda.
std::vector<Index> jsbs_reduced_set(const LabeledSpectra& spectra, double lambda,
                                    const JsbsConfig& config = {});

}  // namespace sparsespec

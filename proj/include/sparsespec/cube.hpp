#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sparsespec {

using Index = Eigen::Index;

/// Raised for malformed inputs: bad shapes, broken files, violated preconditions.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hyperspectral image cube. Samples are stored band-major: band varies
/// slowest, then row, then column.
class HyperspectralCube {
 public:
  HyperspectralCube() = default;
  HyperspectralCube(Index width, Index height, Index bands,
                    std::vector<double> samples,
                    std::optional<std::vector<double>> wavelengths = std::nullopt);

  /// Zero-filled cube.
  static HyperspectralCube zeros(Index width, Index height, Index bands);

  Index width() const { return width_; }
  Index height() const { return height_; }
  Index bands() const { return bands_; }
  Index pixels() const { return width_ * height_; }

  double at(Index x, Index y, Index band) const {
    return samples_[static_cast<std::size_t>((band * height_ + y) * width_ + x)];
  }
  double& at(Index x, Index y, Index band) {
    return samples_[static_cast<std::size_t>((band * height_ + y) * width_ + x)];
  }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }

  /// Row-major height x width view of one band.
  Eigen::MatrixXd band_image(Index band) const;

  const std::optional<std::vector<double>>& wavelengths() const { return wavelengths_; }

 private:
  Index width_ = 0;
  Index height_ = 0;
  Index bands_ = 0;
  std::vector<double> samples_;
  std::optional<std::vector<double>> wavelengths_;
};

/// Disjoint feature groups covering columns 0..p-1, each with a positive weight.
class GroupStructure {
 public:
  GroupStructure() = default;
  GroupStructure(std::vector<std::vector<Index>> groups, std::vector<double> weights);

  /// Groups are contiguous runs of the given sizes; weights default to sqrt(size).
  static GroupStructure contiguous(std::span<const Index> sizes);
  /// g groups of equal size m over p = g*m columns.
  static GroupStructure uniform(Index groups, Index group_size);
  /// One group per column (g = p), unit weights.
  static GroupStructure singletons(Index p);

  Index num_groups() const { return static_cast<Index>(groups_.size()); }
  Index num_features() const { return num_features_; }
  const std::vector<Index>& group(Index i) const { return groups_[static_cast<std::size_t>(i)]; }
  double weight(Index i) const { return weights_[static_cast<std::size_t>(i)]; }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<Index> sizes() const;

  /// Group index owning each column.
  std::vector<Index> owner() const;

  /// Throws DataError unless the groups partition exactly 0..p-1.
  void validate(Index p) const;

 private:
  std::vector<std::vector<Index>> groups_;
  std::vector<double> weights_;
  Index num_features_ = 0;
};

/// Column-centered observation matrix together with the mean removed from it.
struct DataMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd column_mean;
  GroupStructure groups;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Centers `raw` and records its column means.
  static DataMatrix centered(const Eigen::MatrixXd& raw, GroupStructure groups);

  /// values + column_mean, i.e. the data as it was before centering.
  Eigen::MatrixXd uncentered() const;
};

/// Unit-normalized per-pixel spectra with ground-truth ink ids.
/// Label 0 marks a pixel without ground truth; inks are 1..num_inks.
struct LabeledSpectra {
  Eigen::MatrixXd spectra;
  std::vector<int> labels;
  int num_inks = 0;
  std::vector<Index> degenerate_rows;
};

struct NormalizedRows {
  Eigen::MatrixXd rows;
  std::vector<Index> degenerate;
};

/// Scales each nonzero row to unit l2 norm. Zero rows stay zero and are
/// reported as degenerate.
NormalizedRows normalize_spectra(const Eigen::MatrixXd& raw);

struct CubeShape {
  Index width = 0;
  Index height = 0;
  Index bands = 0;
};

/// Samples non-overlapping side x side x bands volumes. Each row is one
/// patch (patches in raster order); group b holds the side*side spatial
/// values of band b. Right/bottom remainders are discarded. Centered.
DataMatrix extract_patches(const HyperspectralCube& cube, Index side);

/// Raw (uncentered) patch matrix, same layout as extract_patches.
Eigen::MatrixXd patch_matrix(const HyperspectralCube& cube, Index side);

/// Inverse of extract_patches. `values` must be uncentered. Pixels outside
/// the patch grid are filled with the per-band mean of `column_mean`.
HyperspectralCube reassemble_patches(const Eigen::MatrixXd& values,
                                     const Eigen::VectorXd& column_mean,
                                     CubeShape shape, Index side);

/// Convenience overload: un-centers `matrix` before reassembly.
HyperspectralCube reassemble_patches(const DataMatrix& matrix, CubeShape shape, Index side);

/// Column index of pixel (dx, dy) of band `band` inside a patch row.
inline Index patch_column(Index band, Index dx, Index dy, Index side) {
  return band * side * side + dy * side + dx;
}

}  // namespace sparsespec

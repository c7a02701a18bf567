#include "sparsespec/cube.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsespec {

HyperspectralCube::HyperspectralCube(Index width, Index height, Index bands,
                                     std::vector<double> samples,
                                     std::optional<std::vector<double>> wavelengths)
    : width_(width),
      height_(height),
      bands_(bands),
      samples_(std::move(samples)),
      wavelengths_(std::move(wavelengths)) {
  if (width <= 0 || height <= 0 || bands <= 0) {
    throw DataError("cube dimensions must be positive");
  }
  if (static_cast<Index>(samples_.size()) != width * height * bands) {
    throw DataError("sample count mismatch");
  }
  if (wavelengths_) {
    if (static_cast<Index>(wavelengths_->size()) != bands) {
      throw DataError("wavelength count does not match band count");
    }
    for (std::size_t i = 1; i < wavelengths_->size(); ++i) {
      if (!((*wavelengths_)[i] > (*wavelengths_)[i - 1])) {
        throw DataError("wavelengths must be strictly increasing");
      }
    }
  }
}

HyperspectralCube HyperspectralCube::zeros(Index width, Index height, Index bands) {
  return HyperspectralCube(width, height, bands,
                           std::vector<double>(static_cast<std::size_t>(width * height * bands), 0.0));
}

Eigen::MatrixXd HyperspectralCube::band_image(Index band) const {
  if (band < 0 || band >= bands_) throw DataError("band index out of range");
  Eigen::MatrixXd img(height_, width_);
  for (Index y = 0; y < height_; ++y)
    for (Index x = 0; x < width_; ++x) img(y, x) = at(x, y, band);
  return img;
}

// ---------------------------------------------------------------------------

GroupStructure::GroupStructure(std::vector<std::vector<Index>> groups, std::vector<double> weights)
    : groups_(std::move(groups)), weights_(std::move(weights)) {
  if (weights_.size() != groups_.size()) {
    throw DataError("group weight count does not match group count");
  }
  for (double w : weights_) {
    if (!(w > 0.0)) throw DataError("group weights must be positive");
  }
  for (const auto& g : groups_) {
    if (g.empty()) throw DataError("empty feature group");
    num_features_ += static_cast<Index>(g.size());
  }
}

GroupStructure GroupStructure::contiguous(std::span<const Index> sizes) {
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  Index next = 0;
  for (Index s : sizes) {
    if (s <= 0) throw DataError("group sizes must be positive");
    std::vector<Index> g(static_cast<std::size_t>(s));
    std::iota(g.begin(), g.end(), next);
    next += s;
    groups.push_back(std::move(g));
    weights.push_back(std::sqrt(static_cast<double>(s)));
  }
  return GroupStructure(std::move(groups), std::move(weights));
}

GroupStructure GroupStructure::uniform(Index groups, Index group_size) {
  std::vector<Index> sizes(static_cast<std::size_t>(groups), group_size);
  return contiguous(sizes);
}

GroupStructure GroupStructure::singletons(Index p) { return uniform(p, 1); }

std::vector<Index> GroupStructure::sizes() const {
  std::vector<Index> out;
  out.reserve(groups_.size());
  for (const auto& g : groups_) out.push_back(static_cast<Index>(g.size()));
  return out;
}

std::vector<Index> GroupStructure::owner() const {
  std::vector<Index> own(static_cast<std::size_t>(num_features_), -1);
  for (std::size_t i = 0; i < groups_.size(); ++i)
    for (Index c : groups_[i]) {
      if (c >= 0 && c < num_features_) own[static_cast<std::size_t>(c)] = static_cast<Index>(i);
    }
  return own;
}

void GroupStructure::validate(Index p) const {
  if (num_features_ != p) {
    throw DataError("groups cover " + std::to_string(num_features_) + " features, expected " +
                    std::to_string(p));
  }
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  for (const auto& g : groups_) {
    for (Index c : g) {
      if (c < 0 || c >= p) throw DataError("group index out of range");
      if (seen[static_cast<std::size_t>(c)]++) throw DataError("feature groups overlap");
    }
  }
}

// ---------------------------------------------------------------------------

DataMatrix DataMatrix::centered(const Eigen::MatrixXd& raw, GroupStructure groups) {
  if (raw.rows() < 1) throw DataError("data matrix has no rows");
  groups.validate(raw.cols());
  DataMatrix m;
  m.column_mean = raw.colwise().mean().transpose();
  m.values = raw.rowwise() - m.column_mean.transpose();
  m.groups = std::move(groups);
  return m;
}

Eigen::MatrixXd DataMatrix::uncentered() const {
  return values.rowwise() + column_mean.transpose();
}

NormalizedRows normalize_spectra(const Eigen::MatrixXd& raw) {
  NormalizedRows out{raw, {}};
  for (Index i = 0; i < raw.rows(); ++i) {
    const double norm = raw.row(i).norm();
    if (norm > 0.0) {
      out.rows.row(i) /= norm;
    } else {
      out.rows.row(i).setZero();
      out.degenerate.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd patch_matrix(const HyperspectralCube& cube, Index side) {
  if (side < 1) throw DataError("patch side must be at least 1");
  if (side > cube.width() || side > cube.height()) {
    throw DataError("patch side larger than a spatial dimension");
  }
  const Index px = cube.width() / side;
  const Index py = cube.height() / side;
  const Index p = side * side * cube.bands();
  Eigen::MatrixXd raw(px * py, p);
  for (Index j = 0; j < py; ++j) {
    for (Index i = 0; i < px; ++i) {
      const Index row = j * px + i;
      for (Index b = 0; b < cube.bands(); ++b)
        for (Index dy = 0; dy < side; ++dy)
          for (Index dx = 0; dx < side; ++dx)
            raw(row, patch_column(b, dx, dy, side)) = cube.at(i * side + dx, j * side + dy, b);
    }
  }
  return raw;
}

DataMatrix extract_patches(const HyperspectralCube& cube, Index side) {
  Eigen::MatrixXd raw = patch_matrix(cube, side);
  return DataMatrix::centered(raw, GroupStructure::uniform(cube.bands(), side * side));
}

HyperspectralCube reassemble_patches(const Eigen::MatrixXd& values,
                                     const Eigen::VectorXd& column_mean,
                                     CubeShape shape, Index side) {
  if (side < 1 || side > shape.width || side > shape.height || shape.bands < 1) {
    throw DataError("inconsistent cube dimensions for patch side");
  }
  const Index px = shape.width / side;
  const Index py = shape.height / side;
  const Index p = side * side * shape.bands;
  if (values.cols() != p || column_mean.size() != p) {
    throw DataError("patch matrix has " + std::to_string(values.cols()) + " columns, expected " +
                    std::to_string(p));
  }
  if (values.rows() != px * py) {
    throw DataError("patch matrix has " + std::to_string(values.rows()) + " rows, expected " +
                    std::to_string(px * py));
  }
  HyperspectralCube cube = HyperspectralCube::zeros(shape.width, shape.height, shape.bands);
  const Index area = side * side;
  for (Index b = 0; b < shape.bands; ++b) {
    const double band_mean = column_mean.segment(b * area, area).mean();
    for (Index y = 0; y < shape.height; ++y)
      for (Index x = 0; x < shape.width; ++x) cube.at(x, y, b) = band_mean;
  }
  for (Index j = 0; j < py; ++j)
    for (Index i = 0; i < px; ++i) {
      const Index row = j * px + i;
      for (Index b = 0; b < shape.bands; ++b)
        for (Index dy = 0; dy < side; ++dy)
          for (Index dx = 0; dx < side; ++dx)
            cube.at(i * side + dx, j * side + dy, b) = values(row, patch_column(b, dx, dy, side));
    }
  return cube;
}

HyperspectralCube reassemble_patches(const DataMatrix& matrix, CubeShape shape, Index side) {
  return reassemble_patches(matrix.uncentered(), matrix.column_mean, shape, side);
}

}  // namespace sparsespec

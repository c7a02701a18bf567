#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/binarize.hpp"
#include "sparsespec/cube.hpp"
#include "sparsespec/kmeans.hpp"

namespace sparsespec {

/// Largest g accepted by mismatch_accuracy (g! permutations are enumerated).
inline constexpr int kMaxMismatchInks = 8;

/// Mean over inks of T_i / (T_i + F_i + N_i), maximized over relabelings of
/// the predicted clusters. Pixels whose truth label is 0 are ignored; an ink
/// absent from both truth and prediction scores 1. Labels are 1..g.
double mismatch_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted, int g);

/// Same metric evaluated on every permutation directly, without the
/// confusion matrix shortcut.
double mismatch_accuracy_reference(const std::vector<int>& truth, const std::vector<int>& predicted,
                                   int g);

/// Spectra of the pixels where `ink_mask` is nonzero, in raster order,
/// unit-normalized. Labels come from `labels_image` (0 when absent).
LabeledSpectra extract_ink_spectra(const HyperspectralCube& cube, const Mask& ink_mask,
                                   const Eigen::MatrixXi* labels_image = nullptr);

/// Copy of `spectra` restricted to the given bands (no renormalization).
LabeledSpectra select_bands(const LabeledSpectra& spectra, const std::vector<Index>& bands);

struct DetectOptions {
  BinarizationParams binarization;
  int g = 2;
  /// Bands used for clustering; all bands when empty.
  std::vector<Index> bands;
  KMeansConfig kmeans;
};

struct DetectReport {
  Index mask_band = 0;
  bool blank = false;
  Index ink_pixels = 0;
  Index degenerate_pixels = 0;
  std::vector<Index> bands;
  /// Per pixel: 0 paper (or degenerate spectrum), 1..g predicted ink.
  Eigen::MatrixXi labels;
  /// Clustering of the non-degenerate ink pixels; empty on blank pages.
  std::optional<ClusterResult> clusters;
  /// Mismatch accuracy on ink-mask pixels with nonzero truth, when truth is given.
  std::optional<double> accuracy;
  Index scored_pixels = 0;
};

/// Binarize, extract ink spectra, cluster, and score against `truth` if given.
DetectReport detect(const HyperspectralCube& cube, const DetectOptions& options,
                    const Eigen::MatrixXi* truth = nullptr);

}  // namespace sparsespec

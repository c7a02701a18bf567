#include "sparsespec/ink.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparsespec {

namespace {

void check_labels(const std::vector<int>& truth, const std::vector<int>& predicted, int g) {
  if (g < 1) throw std::invalid_argument("g must be positive");
  if (g > kMaxMismatchInks) {
    throw std::invalid_argument("mismatch accuracy supports at most " +
                                std::to_string(kMaxMismatchInks) + " inks");
  }
  if (truth.size() != predicted.size()) throw DataError("label vectors differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] > g) throw DataError("truth label out of range");
    if (truth[i] != 0 && (predicted[i] < 1 || predicted[i] > g)) {
      throw DataError("predicted label out of range");
    }
  }
}

double ratio(long t, long f, long n) {
  const long d = t + f + n;
  return d == 0 ? 1.0 : static_cast<double>(t) / static_cast<double>(d);
}

}  // namespace

double mismatch_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted, int g) {
  check_labels(truth, predicted, g);
  const auto G = static_cast<std::size_t>(g);
  std::vector<long> confusion(G * G, 0);  // [truth - 1][pred - 1]
  std::vector<long> truth_count(G, 0), pred_count(G, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    const auto t = static_cast<std::size_t>(truth[i] - 1);
    const auto p = static_cast<std::size_t>(predicted[i] - 1);
    ++confusion[t * G + p];
    ++truth_count[t];
    ++pred_count[p];
  }
  // perm[c] is the ink assigned to predicted cluster c.
  std::vector<std::size_t> perm(G);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> cluster_of(G);
  double best = 0.0;
  do {
    for (std::size_t c = 0; c < G; ++c) cluster_of[perm[c]] = c;
    double sum = 0.0;
    for (std::size_t ink = 0; ink < G; ++ink) {
      const std::size_t c = cluster_of[ink];
      const long t = confusion[ink * G + c];
      sum += ratio(t, pred_count[c] - t, truth_count[ink] - t);
    }
    best = std::max(best, sum / g);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double mismatch_accuracy_reference(const std::vector<int>& truth, const std::vector<int>& predicted,
                                   int g) {
  check_labels(truth, predicted, g);
  std::vector<int> perm(static_cast<std::size_t>(g));
  std::iota(perm.begin(), perm.end(), 1);
  double best = 0.0;
  do {
    double sum = 0.0;
    for (int ink = 1; ink <= g; ++ink) {
      long t = 0, f = 0, n = 0;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) continue;
        const int relabeled = perm[static_cast<std::size_t>(predicted[i] - 1)];
        if (truth[i] == ink && relabeled == ink) ++t;
        else if (truth[i] != ink && relabeled == ink) ++f;
        else if (truth[i] == ink && relabeled != ink) ++n;
      }
      sum += ratio(t, f, n);
    }
    best = std::max(best, sum / g);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

LabeledSpectra extract_ink_spectra(const HyperspectralCube& cube, const Mask& ink_mask,
                                   const Eigen::MatrixXi* labels_image) {
  if (ink_mask.rows() != cube.height() || ink_mask.cols() != cube.width()) {
    throw DataError("mask dimensions do not match the cube");
  }
  if (labels_image && (labels_image->rows() != cube.height() || labels_image->cols() != cube.width())) {
    throw DataError("label image dimensions do not match the cube");
  }
  std::vector<std::pair<Index, Index>> pixels;
  for (Index y = 0; y < cube.height(); ++y)
    for (Index x = 0; x < cube.width(); ++x)
      if (ink_mask(y, x)) pixels.emplace_back(x, y);
  if (pixels.empty()) throw DataError("ink mask is empty");

  Eigen::MatrixXd raw(static_cast<Index>(pixels.size()), cube.bands());
  LabeledSpectra out;
  out.labels.resize(pixels.size(), 0);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto [x, y] = pixels[i];
    for (Index b = 0; b < cube.bands(); ++b) raw(static_cast<Index>(i), b) = cube.at(x, y, b);
    if (labels_image) out.labels[i] = (*labels_image)(y, x);
  }
  auto normalized = normalize_spectra(raw);
  out.spectra = std::move(normalized.rows);
  out.degenerate_rows = std::move(normalized.degenerate);
  out.num_inks = out.labels.empty() ? 0 : *std::max_element(out.labels.begin(), out.labels.end());
  return out;
}

LabeledSpectra select_bands(const LabeledSpectra& spectra, const std::vector<Index>& bands) {
  if (bands.empty()) throw DataError("empty band set");
  LabeledSpectra out;
  out.spectra.resize(spectra.spectra.rows(), static_cast<Index>(bands.size()));
  for (std::size_t j = 0; j < bands.size(); ++j) {
    if (bands[j] < 0 || bands[j] >= spectra.spectra.cols()) throw DataError("band index out of range");
    out.spectra.col(static_cast<Index>(j)) = spectra.spectra.col(bands[j]);
  }
  out.labels = spectra.labels;
  out.num_inks = spectra.num_inks;
  out.degenerate_rows = spectra.degenerate_rows;
  return out;
}

DetectReport detect(const HyperspectralCube& cube, const DetectOptions& options,
                    const Eigen::MatrixXi* truth) {
  if (cube.pixels() == 0 || cube.bands() == 0) throw DataError("empty cube");
  if (truth && (truth->rows() != cube.height() || truth->cols() != cube.width())) {
    throw DataError("truth image dimensions do not match the cube");
  }
  DetectReport report;
  report.mask_band = options.binarization.mask_band ? *options.binarization.mask_band
                                                    : select_mask_band(cube);
  report.bands = options.bands;
  if (report.bands.empty()) {
    report.bands.resize(static_cast<std::size_t>(cube.bands()));
    std::iota(report.bands.begin(), report.bands.end(), Index{0});
  }
  for (Index b : report.bands)
    if (b < 0 || b >= cube.bands()) throw DataError("band index out of range");
  report.labels = Eigen::MatrixXi::Zero(cube.height(), cube.width());

  const Binarization bin = binarize(band_intensity(cube, report.mask_band), options.binarization);
  report.blank = bin.blank;
  report.ink_pixels = static_cast<Index>(bin.ink.cast<Index>().sum());
  if (report.ink_pixels == 0) return report;

  const LabeledSpectra all = extract_ink_spectra(cube, bin.ink, truth);
  const LabeledSpectra used = select_bands(all, report.bands);
  report.degenerate_pixels = static_cast<Index>(used.degenerate_rows.size());

  std::vector<bool> degenerate(static_cast<std::size_t>(used.spectra.rows()), false);
  for (Index d : used.degenerate_rows) degenerate[static_cast<std::size_t>(d)] = true;
  std::vector<Index> keep;
  for (Index i = 0; i < used.spectra.rows(); ++i)
    if (!degenerate[static_cast<std::size_t>(i)]) keep.push_back(i);
  if (static_cast<Index>(keep.size()) < options.g) {
    throw DataError("fewer usable ink pixels than clusters");
  }
  Eigen::MatrixXd X(static_cast<Index>(keep.size()), used.spectra.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) X.row(static_cast<Index>(i)) = used.spectra.row(keep[i]);
  report.clusters = kmeans(X, options.g, options.kmeans);

  // Write predictions back in the raster order used by extraction.
  std::vector<int> predicted(static_cast<std::size_t>(used.spectra.rows()), 0);
  for (std::size_t i = 0; i < keep.size(); ++i) predicted[static_cast<std::size_t>(keep[i])] = report.clusters->labels[i];
  std::size_t row = 0;
  for (Index y = 0; y < cube.height(); ++y)
    for (Index x = 0; x < cube.width(); ++x)
      if (bin.ink(y, x)) report.labels(y, x) = predicted[row++];

  if (truth) {
    std::vector<int> t, p;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const int label = used.labels[static_cast<std::size_t>(keep[i])];
      if (label == 0) continue;
      if (label > options.g) throw DataError("truth has more inks than g");
      t.push_back(label);
      p.push_back(report.clusters->labels[i]);
    }
    report.scored_pixels = static_cast<Index>(t.size());
    report.accuracy = mismatch_accuracy(t, p, options.g);
  }
  return report;
}

}  // namespace sparsespec

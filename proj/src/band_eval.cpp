#include "sparsespec/band_eval.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "sparsespec/ink.hpp"
#include "sparsespec/parallel.hpp"

namespace sparsespec {

std::string_view to_string(BandSource source) {
  switch (source) {
    case BandSource::kSfbs: return "sfbs";
    case BandSource::kJsbs: return "jsbs";
    case BandSource::kManual: return "manual";
  }
  return "unknown";
}

Eigen::MatrixXd center_with(const Eigen::MatrixXd& raw, const Eigen::VectorXd& column_mean) {
  if (column_mean.size() == 0) return raw;
  if (column_mean.size() != raw.cols()) throw DataError("column mean length does not match data");
  return raw.rowwise() - column_mean.transpose();
}

Eigen::MatrixXd reconstruct_rows(const Eigen::MatrixXd& raw, const SparseBasis& basis,
                                 double zero_tol) {
  if (raw.cols() != basis.p()) throw DataError("data width does not match the basis");
  Eigen::MatrixXd X = center_with(raw, basis.column_mean);
  std::vector<bool> sensed(static_cast<std::size_t>(basis.p()), false);
  for (Index g : active_groups(basis.B, basis.groups, zero_tol))
    for (Index c : basis.groups.group(g)) sensed[static_cast<std::size_t>(c)] = true;
  for (Index c = 0; c < X.cols(); ++c)
    if (!sensed[static_cast<std::size_t>(c)]) X.col(c).setZero();
  Eigen::MatrixXd out = (X * basis.B) * basis.A.transpose();
  if (basis.column_mean.size() == basis.p()) out.rowwise() += basis.column_mean.transpose();
  return out;
}

double reconstruction_error(const Eigen::MatrixXd& X, const SparseBasis& basis,
                            const std::optional<Eigen::MatrixXd>& V) {
  if (X.cols() != basis.p()) throw DataError("data width does not match the basis");
  const Eigen::MatrixXd projected = V ? Eigen::MatrixXd((X * *V) * V->transpose()) : X;
  const double denom = projected.norm();
  if (denom == 0.0) throw DataError("reconstruction error undefined for zero data");
  return (projected - (X * basis.B) * basis.A.transpose()).norm() / denom;
}

HyperspectralCube reconstruct_cube(const HyperspectralCube& cube, const SparseBasis& basis,
                                   Index side, double zero_tol) {
  if (cube.bands() != basis.groups.num_groups() || side * side * cube.bands() != basis.p()) {
    throw DataError("cube does not match the basis layout");
  }
  const Eigen::MatrixXd raw = patch_matrix(cube, side);
  const Eigen::MatrixXd rec = reconstruct_rows(raw, basis, zero_tol);
  Eigen::VectorXd mean = basis.column_mean.size() == basis.p()
                             ? basis.column_mean
                             : Eigen::VectorXd(Eigen::VectorXd::Zero(basis.p()));
  return reassemble_patches(rec, mean, {cube.width(), cube.height(), cube.bands()}, side);
}

std::vector<Index> nearest_rows(const Eigen::MatrixXd& gallery, const Eigen::MatrixXd& queries) {
  std::vector<Index> out(static_cast<std::size_t>(queries.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < gallery.rows(); ++i) {
      const double d = (gallery.row(i) - queries.row(q)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out[static_cast<std::size_t>(q)] = best;
  }
  return out;
}

namespace {

double knn(const Eigen::MatrixXd& gallery, const std::vector<int>& gallery_labels,
           const Eigen::MatrixXd& probes, const std::vector<int>& probe_labels,
           const SparseBasis& basis, bool parallel) {
  if (gallery.rows() == 0) throw DataError("empty gallery");
  if (static_cast<Index>(gallery_labels.size()) != gallery.rows() ||
      static_cast<Index>(probe_labels.size()) != probes.rows()) {
    throw DataError("label count does not match rows");
  }
  if (gallery.cols() != probes.cols()) throw DataError("gallery and probes differ in width");
  if (probes.rows() == 0) throw DataError("no probes");
  const Eigen::MatrixXd rec = reconstruct_rows(probes, basis);
  std::vector<char> hit(static_cast<std::size_t>(probes.rows()), 0);
  parallel_for(rec.rows(), parallel, [&](std::ptrdiff_t q) {
    const Index nn = nearest_rows(gallery, rec.row(q))[0];
    hit[static_cast<std::size_t>(q)] =
        gallery_labels[static_cast<std::size_t>(nn)] == probe_labels[static_cast<std::size_t>(q)];
  });
  Index correct = 0;
  for (char h : hit) correct += h;
  return static_cast<double>(correct) / static_cast<double>(probes.rows());
}

}  // namespace

double knn_recognition(const Eigen::MatrixXd& gallery, const std::vector<int>& gallery_labels,
                       const Eigen::MatrixXd& probes, const std::vector<int>& probe_labels,
                       const SparseBasis& basis) {
  return knn(gallery, gallery_labels, probes, probe_labels, basis, true);
}

double knn_recognition_serial(const Eigen::MatrixXd& gallery, const std::vector<int>& gallery_labels,
                              const Eigen::MatrixXd& probes, const std::vector<int>& probe_labels,
                              const SparseBasis& basis) {
  return knn(gallery, gallery_labels, probes, probe_labels, basis, false);
}

std::vector<CurvePoint> error_curve(const std::map<Index, ModelRecord>& models,
                                    const Eigen::MatrixXd& X_test_raw) {
  std::vector<CurvePoint> curve;
  for (const auto& [r, rec] : models) {
    const Eigen::MatrixXd X = center_with(X_test_raw, rec.basis.column_mean);
    curve.push_back({r, rec.lambda, reconstruction_error(X, rec.basis)});
  }
  return curve;
}

double ClusteringAccuracy::operator()(const LabeledSpectra& spectra,
                                      const std::vector<Index>& bands) const {
  const LabeledSpectra sub = select_bands(spectra, bands);
  const ClusterResult clusters = sparsespec::kmeans(sub.spectra, g, kmeans);
  return mismatch_accuracy(sub.labels, clusters.labels, g);
}

// ---------------------------------------------------------------------------

SfbsResult sfbs(const LabeledSpectra& spectra, const SubsetScorer& score) {
  const Index p = spectra.spectra.cols();
  if (p < 1) throw DataError("sfbs needs at least one band");
  SfbsResult out;
  out.bands.source = BandSource::kSfbs;
  std::vector<Index> selected;
  std::vector<bool> used(static_cast<std::size_t>(p), false);
  double current = -std::numeric_limits<double>::infinity();
  while (static_cast<Index>(selected.size()) < p) {
    std::vector<Index> candidates;
    for (Index b = 0; b < p; ++b)
      if (!used[static_cast<std::size_t>(b)]) candidates.push_back(b);
    std::vector<double> scores(candidates.size());
    parallel_for(static_cast<std::ptrdiff_t>(candidates.size()), true, [&](std::ptrdiff_t i) {
      std::vector<Index> trial = selected;
      trial.push_back(candidates[static_cast<std::size_t>(i)]);
      std::sort(trial.begin(), trial.end());
      scores[static_cast<std::size_t>(i)] = score(spectra, trial);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    if (!(scores[best] > current)) {
      out.rejected_accuracy = scores[best];
      break;
    }
    current = scores[best];
    selected.push_back(candidates[best]);
    used[static_cast<std::size_t>(candidates[best])] = true;
    out.trace.push_back({candidates[best], current});
  }
  std::sort(selected.begin(), selected.end());
  out.bands.indices = std::move(selected);
  out.bands.accuracy = current;
  return out;
}

std::vector<Index> jsbs_reduced_set(const LabeledSpectra& spectra, double lambda,
                                    const JsbsConfig& config) {
  const Index p = spectra.spectra.cols();
  const DataMatrix X = DataMatrix::centered(spectra.spectra, GroupStructure::singletons(p));
  const SparseBasis basis = fit(X, Algorithm::kJspca, lambda, config.fit);
  return active_groups(basis.B, X.groups, config.zero_tol);
}

JsbsResult best_subset(const LabeledSpectra& spectra, const std::vector<Index>& reduced,
                       const SubsetScorer& score, bool parallel) {
  if (reduced.empty()) throw DataError("empty reduced set");
  if (reduced.size() >= 63) throw DataError("reduced set too large to enumerate");
  std::vector<Index> R = reduced;
  std::sort(R.begin(), R.end());
  const std::uint64_t total = (std::uint64_t{1} << R.size()) - 1;
  auto subset = [&](std::uint64_t mask) {
    std::vector<Index> s;
    for (std::size_t i = 0; i < R.size(); ++i)
      if (mask >> i & 1U) s.push_back(R[i]);
    return s;
  };
  std::vector<double> scores(static_cast<std::size_t>(total));
  parallel_for(static_cast<std::ptrdiff_t>(total), parallel, [&](std::ptrdiff_t m) {
    scores[static_cast<std::size_t>(m)] = score(spectra, subset(static_cast<std::uint64_t>(m) + 1));
  });

  JsbsResult out;
  out.reduced = R;
  out.subsets_evaluated = static_cast<std::size_t>(total);
  out.bands.source = BandSource::kJsbs;
  bool have = false;
  for (std::uint64_t m = 1; m <= total; ++m) {
    const double acc = scores[static_cast<std::size_t>(m - 1)];
    std::vector<Index> s = subset(m);
    const bool wins = !have || acc > out.bands.accuracy ||
                      (acc == out.bands.accuracy &&
                       (s.size() < out.bands.indices.size() ||
                        (s.size() == out.bands.indices.size() && s < out.bands.indices)));
    if (wins) {
      out.bands.accuracy = acc;
      out.bands.indices = std::move(s);
      have = true;
    }
  }
  return out;
}

JsbsResult jsbs(const LabeledSpectra& spectra, double lambda, const SubsetScorer& score,
                const JsbsConfig& config) {
  const std::vector<Index> R = jsbs_reduced_set(spectra, lambda, config);
  if (R.empty()) throw DataError("empty reduced set: lambda too large");
  if (static_cast<Index>(R.size()) > config.max_reduced) {
    throw DataError("reduced set has " + std::to_string(R.size()) + " bands (limit " +
                    std::to_string(config.max_reduced) + "); increase lambda");
  }
  return best_subset(spectra, R, score);
}

}  // namespace sparsespec

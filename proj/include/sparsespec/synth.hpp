#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"

namespace sparsespec {

struct GroupLowRankOptions {
  /// Rank of the latent factors shared by the active groups.
  Index latent_rank = 2;
  /// Give every active group its own latent factors instead of sharing them.
  bool independent_latents = false;
  /// Optional per-group signal scale (length g); 1 when empty.
  std::vector<double> group_scales;
};

/// Observations whose active groups are driven by low-rank latent factors and
/// whose inactive groups hold only i.i.d. N(0, noise_sigma^2) noise. Centered.
/// `active_groups` holds 0-based group indices.
DataMatrix synth_group_lowrank(Index n, const GroupStructure& groups,
                               const std::vector<Index>& active_groups, double noise_sigma,
                               std::uint64_t seed, const GroupLowRankOptions& options = {});

/// Smooth, increasing reflectance curve shared by both synthetic inks.
Eigen::VectorXd ink_base_spectrum(Index p);

/// Mean spectra of the two synthetic inks: identical except that ink 2 is
/// brighter by `gap` at `separable_band` (0-based).
std::pair<Eigen::VectorXd, Eigen::VectorXd> ink_scene_means(Index p, Index separable_band,
                                                            double gap);

/// Two-ink spectra: rows 0..n_per_ink-1 are ink 1, the rest ink 2. Each row is
/// its ink mean plus N(0, noise_sigma^2) noise, then unit-normalized.
LabeledSpectra synth_ink_scene(Index n_per_ink, Index p, Index separable_band, double gap,
                               double noise_sigma, std::uint64_t seed);

struct PageOptions {
  Index width = 160;
  Index height = 160;
  Index bands = 16;
  int num_inks = 2;
  int strokes = 24;
  /// Paper intensity (0..255) at the page center in the binarization band.
  double background = 200.0;
  /// Paper intensity at the page corners.
  double falloff_to = 120.0;
  /// Stroke intensity in the binarization band.
  double ink_level = 40.0;
  double intensity_noise = 2.0;
  /// Spectral contrast between the inks; see ink_scene_means.
  Index separable_band = 6;
  double gap = 0.5;
  /// Std of the additive spectral noise on ink pixels (outside the mask band).
  double spectral_noise = 0.008;
  std::uint64_t seed = 0;
};

/// A handwritten page: strokes of `num_inks` inks on paper under radial
/// illumination falloff.
struct InkPage {
  HyperspectralCube cube;
  /// Ground truth per pixel (row-major, height x width): 0 paper, 1..g ink.
  Eigen::MatrixXi truth;
  /// Band whose wavelength is nearest 640 nm; the page is rendered so that
  /// this band carries the stated intensities.
  Index mask_band = 0;
};

/// Wavelengths used by synthetic pages: evenly spaced from 400 to 700 nm.
std::vector<double> page_wavelengths(Index bands);

InkPage synth_ink_page(const PageOptions& options);

/// Spatially smooth scene cube whose bands are mixtures of a few smooth
/// fields; only `active_bands` carry independent structure, the remaining
/// bands are copies of active ones plus noise.
HyperspectralCube synth_scene_cube(Index width, Index height, Index bands,
                                   const std::vector<Index>& active_bands, double noise_sigma,
                                   std::uint64_t seed);

}  // namespace sparsespec

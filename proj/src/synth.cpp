#include "sparsespec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace sparsespec {

namespace {

Eigen::MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> dist(0.0, sigma);
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

DataMatrix synth_group_lowrank(Index n, const GroupStructure& groups,
                               const std::vector<Index>& active_groups, double noise_sigma,
                               std::uint64_t seed, const GroupLowRankOptions& options) {
  if (active_groups.empty()) throw std::invalid_argument("synth_group_lowrank: empty active set");
  if (n < 2) throw std::invalid_argument("synth_group_lowrank: need at least two observations");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
  const Index g = groups.num_groups();
  const std::set<Index> active(active_groups.begin(), active_groups.end());
  for (Index a : active)
    if (a < 0 || a >= g) throw std::invalid_argument("active group index out of range");
  if (!options.group_scales.empty() && static_cast<Index>(options.group_scales.size()) != g) {
    throw std::invalid_argument("group_scales must have one entry per group");
  }

  const Index p = groups.num_features();
  const Index q = std::max<Index>(1, options.latent_rank);
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, p);
  Eigen::MatrixXd shared = gaussian(n, q, rng);
  for (Index gi = 0; gi < g; ++gi) {
    if (!active.contains(gi)) continue;
    const auto& cols = groups.group(gi);
    const Eigen::MatrixXd latent = options.independent_latents ? gaussian(n, q, rng) : shared;
    const Eigen::MatrixXd loading = gaussian(q, static_cast<Index>(cols.size()), rng);
    const double scale = options.group_scales.empty() ? 1.0 : options.group_scales[static_cast<std::size_t>(gi)];
    const Eigen::MatrixXd block = scale * latent * loading;
    for (std::size_t c = 0; c < cols.size(); ++c) raw.col(cols[c]) = block.col(static_cast<Index>(c));
  }
  if (noise_sigma > 0.0) raw += gaussian(n, p, rng, noise_sigma);
  return DataMatrix::centered(raw, groups);
}

Eigen::VectorXd ink_base_spectrum(Index p) {
  Eigen::VectorXd base(p);
  for (Index j = 0; j < p; ++j) {
    const double t = p > 1 ? static_cast<double>(j) / static_cast<double>(p - 1) : 0.5;
    base(j) = 0.08 + 0.84 * t * t;
  }
  return base;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ink_scene_means(Index p, Index separable_band,
                                                            double gap) {
  if (p < 1) throw std::invalid_argument("ink scene needs at least one band");
  if (separable_band < 0 || separable_band >= p) {
    throw std::invalid_argument("separable band out of range");
  }
  if (!(gap > 0.0)) throw std::invalid_argument("ink gap must be positive");
  Eigen::VectorXd first = ink_base_spectrum(p);
  Eigen::VectorXd second = first;
  second(separable_band) += gap;
  return {first, second};
}

LabeledSpectra synth_ink_scene(Index n_per_ink, Index p, Index separable_band, double gap,
                               double noise_sigma, std::uint64_t seed) {
  if (n_per_ink < 1) throw std::invalid_argument("n_per_ink must be positive");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
  const auto [first, second] = ink_scene_means(p, separable_band, gap);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  Eigen::MatrixXd raw(2 * n_per_ink, p);
  LabeledSpectra out;
  out.num_inks = 2;
  out.labels.resize(static_cast<std::size_t>(2 * n_per_ink));
  for (Index i = 0; i < 2 * n_per_ink; ++i) {
    const bool ink1 = i < n_per_ink;
    raw.row(i) = (ink1 ? first : second).transpose();
    if (noise_sigma > 0.0)
      for (Index j = 0; j < p; ++j) raw(i, j) += noise(rng);
    out.labels[static_cast<std::size_t>(i)] = ink1 ? 1 : 2;
  }
  auto normalized = normalize_spectra(raw);
  out.spectra = std::move(normalized.rows);
  out.degenerate_rows = std::move(normalized.degenerate);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> page_wavelengths(Index bands) {
  std::vector<double> wl(static_cast<std::size_t>(bands));
  for (Index b = 0; b < bands; ++b)
    wl[static_cast<std::size_t>(b)] =
        bands > 1 ? 400.0 + 300.0 * static_cast<double>(b) / static_cast<double>(bands - 1) : 640.0;
  return wl;
}

InkPage synth_ink_page(const PageOptions& o) {
  if (o.width < 8 || o.height < 8 || o.bands < 2) {
    throw std::invalid_argument("page too small");
  }
  if (o.num_inks < 1) throw std::invalid_argument("num_inks must be positive");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::vector<double> wl = page_wavelengths(o.bands);
  Index mask_band = 0;
  for (Index b = 0; b < o.bands; ++b)
    if (std::abs(wl[static_cast<std::size_t>(b)] - 640.0) <
        std::abs(wl[static_cast<std::size_t>(mask_band)] - 640.0))
      mask_band = b;
  if (o.separable_band == mask_band) {
    throw std::invalid_argument("separable band must differ from the binarization band");
  }

  // Strokes: smooth random curves drawn with a round pen.
  Eigen::MatrixXi truth = Eigen::MatrixXi::Zero(o.height, o.width);
  const double margin = 6.0;
  for (int s = 0; s < o.strokes; ++s) {
    const int ink = (s % o.num_inks) + 1;
    double x = margin + unit(rng) * (static_cast<double>(o.width) - 2 * margin);
    double y = margin + unit(rng) * (static_cast<double>(o.height) - 2 * margin);
    double heading = unit(rng) * 2.0 * std::numbers::pi;
    const double radius = 1.0 + unit(rng);
    const int steps = 20 + static_cast<int>(unit(rng) * 30.0);
    for (int t = 0; t < steps; ++t) {
      const Index r = static_cast<Index>(std::ceil(radius));
      for (Index dy = -r; dy <= r; ++dy)
        for (Index dx = -r; dx <= r; ++dx) {
          if (static_cast<double>(dx * dx + dy * dy) > radius * radius) continue;
          const Index px = static_cast<Index>(std::lround(x)) + dx;
          const Index py = static_cast<Index>(std::lround(y)) + dy;
          if (px >= 0 && px < o.width && py >= 0 && py < o.height) truth(py, px) = ink;
        }
      heading += 0.35 * gauss(rng);
      x = std::clamp(x + std::cos(heading), margin, static_cast<double>(o.width) - margin);
      y = std::clamp(y + std::sin(heading), margin, static_cast<double>(o.height) - margin);
    }
  }

  // Ink spectra share the binarization-band level and differ at the separable band.
  const auto [mean1, mean2] = ink_scene_means(o.bands, o.separable_band, o.gap);
  std::vector<Eigen::VectorXd> inks;
  const double level = o.ink_level / 255.0;
  for (int c = 0; c < o.num_inks; ++c) {
    Eigen::VectorXd s = (c % 2 == 0) ? mean1 : mean2;
    if (c >= 2) s(o.separable_band) += o.gap * static_cast<double>(c / 2);
    s *= level / s(mask_band);
    inks.push_back(s);
  }
  const double paper_level = o.background / 255.0;
  const double corner_ratio = o.falloff_to / o.background;

  HyperspectralCube cube = HyperspectralCube::zeros(o.width, o.height, o.bands);
  const double cx = 0.5 * static_cast<double>(o.width - 1);
  const double cy = 0.5 * static_cast<double>(o.height - 1);
  const double rmax2 = cx * cx + cy * cy;
  for (Index y = 0; y < o.height; ++y)
    for (Index x = 0; x < o.width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double illum = 1.0 - (1.0 - corner_ratio) * (dx * dx + dy * dy) / rmax2;
      const int label = truth(y, x);
      for (Index b = 0; b < o.bands; ++b) {
        double v;
        if (label == 0) {
          const double paper = b == mask_band ? paper_level : paper_level * (0.92 + 0.004 * static_cast<double>(b));
          v = illum * paper;
        } else {
          const double m = inks[static_cast<std::size_t>(label - 1)](b);
          v = b == mask_band ? m : m + o.spectral_noise * gauss(rng);
        }
        if (b == mask_band) v += o.intensity_noise / 255.0 * gauss(rng);
        cube.at(x, y, b) = std::clamp(v, 0.0, 1.0);
      }
    }
  return InkPage{HyperspectralCube(o.width, o.height, o.bands,
                                   std::vector<double>(cube.samples().begin(), cube.samples().end()),
                                   wl),
                 std::move(truth), mask_band};
}

HyperspectralCube synth_scene_cube(Index width, Index height, Index bands,
                                   const std::vector<Index>& active_bands, double noise_sigma,
                                   std::uint64_t seed) {
  if (active_bands.empty()) throw std::invalid_argument("synth_scene_cube: empty active set");
  for (Index a : active_bands)
    if (a < 0 || a >= bands) throw std::invalid_argument("active band out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  HyperspectralCube cube = HyperspectralCube::zeros(width, height, bands);
  auto field = [&](Index band) {
    // Sum of a few low-frequency plane waves, mapped into [0.1, 0.9].
    double fx[3], fy[3], ph[3];
    for (int w = 0; w < 3; ++w) {
      fx[w] = (0.5 + 2.5 * unit(rng)) * 2.0 * std::numbers::pi / static_cast<double>(width);
      fy[w] = (0.5 + 2.5 * unit(rng)) * 2.0 * std::numbers::pi / static_cast<double>(height);
      ph[w] = 2.0 * std::numbers::pi * unit(rng);
    }
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x) {
        double v = 0.0;
        for (int w = 0; w < 3; ++w)
          v += std::sin(fx[w] * static_cast<double>(x) + fy[w] * static_cast<double>(y) + ph[w]);
        cube.at(x, y, band) = 0.5 + 0.4 * v / 3.0;
      }
  };
  std::vector<Index> sorted = active_bands;
  std::sort(sorted.begin(), sorted.end());
  for (Index a : sorted) field(a);
  for (Index b = 0; b < bands; ++b) {
    if (std::binary_search(sorted.begin(), sorted.end(), b)) continue;
    // Mixture of the two nearest active bands.
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), b);
    const Index hi = it == sorted.end() ? sorted.back() : *it;
    const Index lo = it == sorted.begin() ? sorted.front() : *(it - 1);
    const double w = hi == lo ? 1.0 : static_cast<double>(hi - b) / static_cast<double>(hi - lo);
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x)
        cube.at(x, y, b) = w * cube.at(x, y, lo) + (1.0 - w) * cube.at(x, y, hi);
  }
  if (noise_sigma > 0.0)
    for (double& v : cube.samples()) v = std::max(0.0, v + noise_sigma * gauss(rng));
  return cube;
}

}  // namespace sparsespec

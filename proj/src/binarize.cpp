#include "sparsespec/binarize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sparsespec {

std::string_view to_string(ThresholdMethod method) {
  return method == ThresholdMethod::kSauvola ? "sauvola" : "otsu";
}

ThresholdMethod parse_threshold_method(std::string_view name) {
  if (name == "sauvola") return ThresholdMethod::kSauvola;
  if (name == "otsu") return ThresholdMethod::kOtsu;
  throw std::invalid_argument("unknown threshold method '" + std::string(name) + "'");
}

std::string_view to_string(SauvolaForm form) {
  return form == SauvolaForm::kStandard ? "standard" : "literal";
}

SauvolaForm parse_sauvola_form(std::string_view name) {
  if (name == "standard") return SauvolaForm::kStandard;
  if (name == "literal") return SauvolaForm::kLiteral;
  throw std::invalid_argument("unknown sauvola form '" + std::string(name) + "'");
}

void BinarizationParams::validate() const {
  if (window < 3) throw std::invalid_argument("window must be at least 3");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
  if (!(r_scale > 1.0)) throw std::invalid_argument("r_scale must exceed 1");
  if (!(blank_std >= 0.0)) throw std::invalid_argument("blank_std must be non-negative");
}

LocalStats local_stats(const Eigen::MatrixXd& image, int window, bool parallel) {
  const Index h = image.rows();
  const Index w = image.cols();
  const Index half = window / 2;
  // Integral images of the edge-replicated image, shifted by one.
  const Index H = h + 2 * half;
  const Index W = w + 2 * half;
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(H + 1, W + 1);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(H + 1, W + 1);
  for (Index y = 0; y < H; ++y) {
    const Index sy = std::clamp<Index>(y - half, 0, h - 1);
    double row1 = 0.0, row2 = 0.0;
    for (Index x = 0; x < W; ++x) {
      const double v = image(sy, std::clamp<Index>(x - half, 0, w - 1));
      row1 += v;
      row2 += v * v;
      s1(y + 1, x + 1) = s1(y, x + 1) + row1;
      s2(y + 1, x + 1) = s2(y, x + 1) + row2;
    }
  }
  LocalStats out{Eigen::MatrixXd(h, w), Eigen::MatrixXd(h, w)};
  const double area = static_cast<double>(window) * static_cast<double>(window);
#pragma omp parallel for schedule(static) if (parallel)
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      // Padded window rows y..y+window-1, columns x..x+window-1.
      const Index y1 = y + window, x1 = x + window;
      const double sum = s1(y1, x1) - s1(y, x1) - s1(y1, x) + s1(y, x);
      const double sq = s2(y1, x1) - s2(y, x1) - s2(y1, x) + s2(y, x);
      const double mu = sum / area;
      out.mean(y, x) = mu;
      out.stddev(y, x) = std::sqrt(std::max(0.0, sq / area - mu * mu));
    }
  return out;
}

double otsu_threshold(const Eigen::MatrixXd& image) {
  std::array<double, 256> hist{};
  for (Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.data()[i], 0.0, 255.0);
    hist[static_cast<std::size_t>(std::lround(v))] += 1.0;
  }
  const double total = static_cast<double>(image.size());
  double sum_all = 0.0;
  for (std::size_t t = 0; t < 256; ++t) sum_all += static_cast<double>(t) * hist[t];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    sum0 += t * hist[static_cast<std::size_t>(t)];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t + 0.5;
}

namespace {

double global_std(const Eigen::MatrixXd& image) {
  const double mean = image.mean();
  return std::sqrt((image.array() - mean).square().mean());
}

Binarization run(const Eigen::MatrixXd& image, const BinarizationParams& params, bool parallel) {
  params.validate();
  if (image.size() == 0) throw DataError("binarize: empty image");
  const Index h = image.rows(), w = image.cols();
  Binarization out;
  out.raw = Mask::Zero(h, w);
  if (global_std(image) < params.blank_std) {
    out.blank = true;
    out.raw.setOnes();
  } else if (params.method == ThresholdMethod::kOtsu) {
    const double t = otsu_threshold(image);
    out.global_threshold = t;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) out.raw(y, x) = image(y, x) > t ? 1 : 0;
  } else {
    const LocalStats stats = local_stats(image, params.effective_window(), parallel);
    const double k = params.kappa, R = params.r_scale;
    const bool standard = params.form == SauvolaForm::kStandard;
#pragma omp parallel for schedule(static) if (parallel)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        const double mu = stats.mean(y, x), sd = stats.stddev(y, x);
        const double t = standard ? mu * (1.0 + k * (sd / R - 1.0)) : mu * (1.0 + k * sd / (R - 1.0));
        out.raw(y, x) = image(y, x) > t ? 1 : 0;
      }
  }
  out.ink = (1 - out.raw.array()).matrix();
  return out;
}

}  // namespace

Binarization binarize(const Eigen::MatrixXd& image, const BinarizationParams& params) {
  return run(image, params, true);
}

Binarization binarize_serial(const Eigen::MatrixXd& image, const BinarizationParams& params) {
  return run(image, params, false);
}

Index select_mask_band(const HyperspectralCube& cube) {
  if (cube.bands() == 0) throw DataError("cube has no bands");
  if (const auto& wl = cube.wavelengths()) {
    Index best = -1;
    for (Index b = 0; b < cube.bands(); ++b) {
      const double d = std::abs((*wl)[static_cast<std::size_t>(b)] - 640.0);
      if (d > 20.0) continue;
      if (best < 0 || d < std::abs((*wl)[static_cast<std::size_t>(best)] - 640.0)) best = b;
    }
    if (best >= 0) return best;
  }
  Index best = 0;
  double best_sd = -1.0;
  for (Index b = 0; b < cube.bands(); ++b) {
    const double sd = global_std(cube.band_image(b));
    if (sd > best_sd) {
      best_sd = sd;
      best = b;
    }
  }
  return best;
}

Eigen::MatrixXd band_intensity(const HyperspectralCube& cube, Index band) {
  if (band < 0 || band >= cube.bands()) throw DataError("band index out of range");
  return (255.0 * cube.band_image(band).array()).cwiseMax(0.0).cwiseMin(255.0).matrix();
}

}  // namespace sparsespec

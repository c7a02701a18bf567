#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"

namespace sparsespec {

enum class ThresholdMethod { kSauvola, kOtsu };

/// kStandard: T = mu (1 + kappa (sigma / R - 1)).
/// kLiteral:  T = mu (1 + kappa sigma / (R - 1)).
enum class SauvolaForm { kStandard, kLiteral };

std::string_view to_string(ThresholdMethod method);
ThresholdMethod parse_threshold_method(std::string_view name);
std::string_view to_string(SauvolaForm form);
SauvolaForm parse_sauvola_form(std::string_view name);

struct BinarizationParams {
  /// Window side; even values are rounded up to the next odd value.
  int window = 32;
  double kappa = 0.15;
  double r_scale = 128.0;
  ThresholdMethod method = ThresholdMethod::kSauvola;
  SauvolaForm form = SauvolaForm::kStandard;
  /// Band to threshold; chosen automatically when unset.
  std::optional<Index> mask_band;
  /// Pages whose global intensity std is below this are blank.
  double blank_std = 2.0;

  void validate() const;
  int effective_window() const { return window % 2 == 0 ? window + 1 : window; }
};

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct Binarization {
  /// 1 where the intensity is above the threshold.
  Mask raw;
  /// Complement of raw: dark pixels (ink).
  Mask ink;
  bool blank = false;
  /// Global threshold (Otsu only).
  std::optional<double> global_threshold;
};

/// Thresholds a height x width image with intensities in 0..255. Sauvola
/// windows are centered with edge-replicated borders.
Binarization binarize(const Eigen::MatrixXd& image, const BinarizationParams& params);

/// Single-threaded variant of binarize.
Binarization binarize_serial(const Eigen::MatrixXd& image, const BinarizationParams& params);

/// Per-pixel local mean and standard deviation over a w x w edge-replicated
/// window (w odd).
struct LocalStats {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd stddev;
};
LocalStats local_stats(const Eigen::MatrixXd& image, int window, bool parallel = true);

/// Otsu threshold on a 256-bin histogram; pixels strictly above it are bright.
double otsu_threshold(const Eigen::MatrixXd& image);

/// The band nearest 640 nm within [620, 660] nm when wavelengths are known,
/// otherwise (or if no band falls in range) the band with the largest std.
Index select_mask_band(const HyperspectralCube& cube);

/// Band scaled to 0..255: clamp(255 * value, 0, 255).
Eigen::MatrixXd band_intensity(const HyperspectralCube& cube, Index band);

}  // namespace sparsespec

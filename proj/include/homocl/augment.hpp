#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "homocl/common.hpp"
#include "homocl/synthdata.hpp"

namespace homocl {

/// SimCLR-style view augmentation settings. Defaults follow the common
/// SimCLR recipe; magnitudes are not fixed by the method itself.
struct AugmentConfig {
  double cropScaleMin = 0.2;
  double cropScaleMax = 1.0;
  double flipProb = 0.5;
  double jitterProb = 0.8;
  double jitterStrength = 0.4;
  double grayscaleProb = 0.2;
  std::uint32_t outputSize = 32;

  void validate() const;
};

struct View {
  std::vector<float> pixels;  // outputSize x outputSize x C
  std::size_t sourceIndex = 0;
};

struct CropRect {
  std::uint32_t x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

/// Random-resized-crop rectangle: area fraction in [scaleMin, scaleMax],
/// aspect ratio log-uniform in [3/4, 4/3]; falls back to the full frame
/// after 10 rejected draws.
CropRect sample_crop(std::uint32_t height, std::uint32_t width, double scaleMin, double scaleMax, Rng& rng);

/// Bilinear resize (half-pixel centers) of `rect` to size x size.
std::vector<float> crop_resize(std::span<const float> img, const ImageShape& shape, const CropRect& rect,
                               std::uint32_t size);

std::vector<float> random_crop_resize(std::span<const float> img, const ImageShape& shape, double scaleMin,
                                      double scaleMax, std::uint32_t size, Rng& rng);

/// Full-frame, un-augmented view used for feature extraction.
std::vector<float> center_view(std::span<const float> img, const ImageShape& shape, std::uint32_t size);

/// center_view of every sample, converted to double and stacked (N x size x size x C).
std::vector<double> stack_center_views(const Dataset& d, std::uint32_t size);

void horizontal_flip(std::span<float> pixels, std::uint32_t size, std::uint32_t channels);

struct JitterStrength {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;

  static JitterStrength uniform(double s) { return {s, s, s}; }
};

/// Brightness, then contrast, then saturation; each factor drawn uniformly in
/// [1 - s, 1 + s] for its strength s, result clamped to [0,1]. Components with
/// zero strength are skipped.
void color_jitter(std::span<float> pixels, std::uint32_t channels, const JitterStrength& strength, Rng& rng);

/// Luma (0.299, 0.587, 0.114) written back to every channel. No-op for C != 3.
void to_grayscale(std::span<float> pixels, std::uint32_t channels);

/// Two independent crop -> flip -> jitter -> grayscale draws of one image.
std::pair<View, View> make_views(std::span<const float> img, const ImageShape& shape, std::size_t sourceIndex,
                                 const AugmentConfig& cfg, Rng& rng);

}  // namespace homocl

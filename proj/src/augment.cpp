#include "homocl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homocl {

void AugmentConfig::validate() const {
  if (!(cropScaleMin > 0.0 && cropScaleMin <= cropScaleMax && cropScaleMax <= 1.0))
    throw std::invalid_argument("augment: need 0 < cropScaleMin <= cropScaleMax <= 1");
  for (double p : {flipProb, jitterProb, grayscaleProb})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("augment: probabilities must be in [0,1]");
  if (!(jitterStrength >= 0.0)) throw std::invalid_argument("augment: jitterStrength must be >= 0");
  if (outputSize < 1) throw std::invalid_argument("augment: outputSize must be >= 1");
}

CropRect sample_crop(std::uint32_t height, std::uint32_t width, double scaleMin, double scaleMax, Rng& rng) {
  const double area = static_cast<double>(height) * width;
  const double log_lo = std::log(3.0 / 4.0), log_hi = std::log(4.0 / 3.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * (scaleMin + (scaleMax - scaleMin) * uniform01(rng));
    const double ratio = std::exp(log_lo + (log_hi - log_lo) * uniform01(rng));
    const auto w = static_cast<long>(std::lround(std::sqrt(target * ratio)));
    const auto h = static_cast<long>(std::lround(std::sqrt(target / ratio)));
    if (w >= 1 && h >= 1 && w <= static_cast<long>(width) && h <= static_cast<long>(height)) {
      CropRect r;
      r.width = static_cast<std::uint32_t>(w);
      r.height = static_cast<std::uint32_t>(h);
      r.y = static_cast<std::uint32_t>(uniform_index(rng, height - r.height + 1));
      r.x = static_cast<std::uint32_t>(uniform_index(rng, width - r.width + 1));
      return r;
    }
  }
  return {0, 0, width, height};
}

std::vector<float> crop_resize(std::span<const float> img, const ImageShape& shape, const CropRect& rect,
                               std::uint32_t size) {
  const std::size_t c = shape.channels;
  std::vector<float> out(std::size_t{size} * size * c);
  const double sy = static_cast<double>(rect.height) / size, sx = static_cast<double>(rect.width) / size;
  for (std::uint32_t oy = 0; oy < size; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(rect.height - 1));
    const auto y0 = static_cast<std::uint32_t>(fy);
    const std::uint32_t y1 = std::min(y0 + 1, rect.height - 1);
    const double ty = fy - y0;
    for (std::uint32_t ox = 0; ox < size; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(rect.width - 1));
      const auto x0 = static_cast<std::uint32_t>(fx);
      const std::uint32_t x1 = std::min(x0 + 1, rect.width - 1);
      const double tx = fx - x0;
      auto at = [&](std::uint32_t y, std::uint32_t x, std::size_t ch) {
        return static_cast<double>(img[((std::size_t{rect.y} + y) * shape.width + rect.x + x) * c + ch]);
      };
      for (std::size_t ch = 0; ch < c; ++ch) {
        double v;
        if (tx == 0.0 && ty == 0.0) {
          v = at(y0, x0, ch);
        } else {
          const double top = at(y0, x0, ch) * (1.0 - tx) + at(y0, x1, ch) * tx;
          const double bottom = at(y1, x0, ch) * (1.0 - tx) + at(y1, x1, ch) * tx;
          v = top * (1.0 - ty) + bottom * ty;
        }
        out[(std::size_t{oy} * size + ox) * c + ch] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

std::vector<float> random_crop_resize(std::span<const float> img, const ImageShape& shape, double scaleMin,
                                      double scaleMax, std::uint32_t size, Rng& rng) {
  return crop_resize(img, shape, sample_crop(shape.height, shape.width, scaleMin, scaleMax, rng), size);
}

std::vector<float> center_view(std::span<const float> img, const ImageShape& shape, std::uint32_t size) {
  return crop_resize(img, shape, {0, 0, shape.width, shape.height}, size);
}

std::vector<double> stack_center_views(const Dataset& d, std::uint32_t size) {
  const std::size_t px = std::size_t{size} * size * d.shape.channels;
  std::vector<double> out(d.size() * px);
  const auto n = static_cast<long>(d.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto v = center_view(d.samples[i].pixels, d.shape, size);
    std::copy(v.begin(), v.end(), out.begin() + i * static_cast<long>(px));
  }
  return out;
}

void horizontal_flip(std::span<float> pixels, std::uint32_t size, std::uint32_t channels) {
  for (std::uint32_t y = 0; y < size; ++y)
    for (std::uint32_t x = 0; x < size / 2; ++x)
      for (std::uint32_t ch = 0; ch < channels; ++ch)
        std::swap(pixels[(std::size_t{y} * size + x) * channels + ch],
                  pixels[(std::size_t{y} * size + (size - 1 - x)) * channels + ch]);
}

namespace {

double luma(const float* px) { return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]; }

double draw_factor(double strength, Rng& rng) {
  const double lo = std::max(0.0, 1.0 - strength);
  return lo + (1.0 + strength - lo) * uniform01(rng);
}

}  // namespace

void color_jitter(std::span<float> pixels, std::uint32_t channels, const JitterStrength& strength, Rng& rng) {
  if (strength.brightness < 0.0 || strength.contrast < 0.0 || strength.saturation < 0.0)
    throw std::invalid_argument("color_jitter: strengths must be >= 0");
  const std::size_t n = pixels.size() / channels;
  if (strength.brightness > 0.0) {
    const double b = draw_factor(strength.brightness, rng);
    for (float& v : pixels) v = static_cast<float>(std::clamp(v * b, 0.0, 1.0));
  }
  if (strength.contrast > 0.0) {
    const double k = draw_factor(strength.contrast, rng);
    double mean = 0.0;
    if (channels == 3) {
      for (std::size_t i = 0; i < n; ++i) mean += luma(&pixels[i * 3]);
      mean /= static_cast<double>(n);
    } else {
      for (float v : pixels) mean += v;
      mean /= static_cast<double>(pixels.size());
    }
    for (float& v : pixels) v = static_cast<float>(std::clamp((v - mean) * k + mean, 0.0, 1.0));
  }
  if (strength.saturation > 0.0 && channels == 3) {
    const double s = draw_factor(strength.saturation, rng);
    for (std::size_t i = 0; i < n; ++i) {
      float* px = &pixels[i * 3];
      // achromatic pixels are exact fixed points
      if (px[0] == px[1] && px[1] == px[2]) continue;
      const double gray = luma(px);
      for (int ch = 0; ch < 3; ++ch) px[ch] = static_cast<float>(std::clamp(gray + (px[ch] - gray) * s, 0.0, 1.0));
    }
  }
}

void to_grayscale(std::span<float> pixels, std::uint32_t channels) {
  if (channels != 3) return;
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    const auto g = static_cast<float>(std::clamp(luma(&pixels[i]), 0.0, 1.0));
    pixels[i] = pixels[i + 1] = pixels[i + 2] = g;
  }
}

std::pair<View, View> make_views(std::span<const float> img, const ImageShape& shape, std::size_t sourceIndex,
                                 const AugmentConfig& cfg, Rng& rng) {
  auto one = [&]() {
    View v;
    v.sourceIndex = sourceIndex;
    v.pixels = random_crop_resize(img, shape, cfg.cropScaleMin, cfg.cropScaleMax, cfg.outputSize, rng);
    if (uniform01(rng) < cfg.flipProb) horizontal_flip(v.pixels, cfg.outputSize, shape.channels);
    if (uniform01(rng) < cfg.jitterProb && cfg.jitterStrength > 0.0)
      color_jitter(v.pixels, shape.channels, JitterStrength::uniform(cfg.jitterStrength), rng);
    if (uniform01(rng) < cfg.grayscaleProb) to_grayscale(v.pixels, shape.channels);
    return v;
  };
  View first = one();
  View second = one();
  return {std::move(first), std::move(second)};
}

}  // namespace homocl

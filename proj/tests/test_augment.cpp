#include <cmath>

#include "doctest.h"
#include "homocl/augment.hpp"
#include "test_util.hpp"

using namespace homocl;

namespace {

std::vector<float> ramp(std::uint32_t size, std::uint32_t channels) {
  std::vector<float> v(std::size_t{size} * size * channels);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>((i % 97) / 96.0);
  return v;
}

}  // namespace

TEST_CASE("crop rectangles stay inside the image with bounded area") {
  Rng rng = make_rng(1);
  for (int t = 0; t < 500; ++t) {
    const auto r = sample_crop(32, 24, 0.2, 1.0, rng);
    CHECK(r.x + r.width <= 24);
    CHECK(r.y + r.height <= 32);
    CHECK(r.width >= 1);
    CHECK(r.height >= 1);
  }
  // a scale range that can never fit falls back to the full frame
  Rng rng2 = make_rng(2);
  CHECK(sample_crop(4, 4, 1.0, 1.0, rng2).width <= 4);
}

TEST_CASE("full-frame resize to the same size is the identity") {
  const ImageShape shape{16, 16, 3};
  const auto img = ramp(16, 3);
  CHECK(center_view(img, shape, 16) == img);
  CHECK(crop_resize(img, shape, {0, 0, 16, 16}, 16) == img);
}

TEST_CASE("downsampling a constant image keeps it constant") {
  const ImageShape shape{16, 16, 1};
  std::vector<float> img(256, 0.25f);
  for (float v : center_view(img, shape, 8)) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("bilinear 2x downsample averages pixel pairs") {
  const ImageShape shape{2, 2, 1};
  const std::vector<float> img{0.0f, 1.0f, 0.5f, 0.5f};
  const auto out = center_view(img, shape, 1);
  CHECK(out[0] == doctest::Approx(0.5f));
}

TEST_CASE("horizontal flip is an involution") {
  auto img = ramp(8, 3);
  const auto orig = img;
  horizontal_flip(img, 8, 3);
  CHECK(img != orig);
  CHECK(img[0] == orig[7 * 3]);
  horizontal_flip(img, 8, 3);
  CHECK(img == orig);
}

TEST_CASE("jitter with zero strength is a no-op; outputs stay in range") {
  auto img = ramp(8, 3);
  const auto orig = img;
  Rng rng = make_rng(4);
  color_jitter(img, 3, {}, rng);
  CHECK(img == orig);
  for (int t = 0; t < 20; ++t) {
    color_jitter(img, 3, JitterStrength::uniform(0.8), rng);
    for (float v : img) REQUIRE((v >= 0.0f && v <= 1.0f));
  }
  CHECK_THROWS(color_jitter(img, 3, {-0.1, 0.0, 0.0}, rng));
}

TEST_CASE("saturation jitter leaves gray pixels unchanged") {
  std::vector<float> gray(8 * 8 * 3, 0.3f);
  Rng rng = make_rng(5);
  color_jitter(gray, 3, {0.0, 0.0, 0.9}, rng);
  for (float v : gray) CHECK(v == 0.3f);
}

TEST_CASE("grayscale writes luma to every channel") {
  std::vector<float> px{1.0f, 0.0f, 0.0f, 0.0f, 1.0f, 0.0f};
  to_grayscale(px, 3);
  CHECK(px[0] == doctest::Approx(0.299f));
  CHECK(px[2] == doctest::Approx(0.299f));
  CHECK(px[4] == doctest::Approx(0.587f));
}

TEST_CASE("view pairs share a source and depend only on the stream") {
  const ImageShape shape{16, 16, 3};
  const auto img = ramp(16, 3);
  AugmentConfig cfg;
  cfg.outputSize = 8;
  Rng a = make_rng(9, {1}), b = make_rng(9, {1});
  const auto [v1, v2] = make_views(img, shape, 42, cfg, a);
  const auto [w1, w2] = make_views(img, shape, 42, cfg, b);
  CHECK(v1.sourceIndex == 42);
  CHECK(v2.sourceIndex == 42);
  CHECK(v1.pixels.size() == 8u * 8 * 3);
  CHECK(v1.pixels == w1.pixels);
  CHECK(v2.pixels == w2.pixels);
  CHECK(v1.pixels != v2.pixels);
}

TEST_CASE("augment config validation") {
  AugmentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cropScaleMin = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.flipProb = 1.5;
  CHECK_THROWS(cfg.validate());
}

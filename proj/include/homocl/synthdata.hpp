#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "homocl/common.hpp"

namespace homocl {

/// Probability vector over semantic classes.
class ClassDistribution {
 public:
  ClassDistribution() = default;
  /// Validates: non-empty, non-negative, sums to 1 within 1e-9.
  explicit ClassDistribution(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t c) const { return weights_[c]; }

  /// Probability that two independent draws share a class.
  double collision_probability() const;

  /// Inverse-CDF class draw from a uniform in [0,1).
  std::uint32_t sample(Rng& rng) const;

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

enum class DistributionKind { uniform, explicit_weights, msl_like, hirise_like };

ClassDistribution make_uniform_distribution(std::size_t classes);
ClassDistribution make_explicit_distribution(std::vector<double> weights);

/// Skewed preset with one dominant class at `max_weight`, the rarest class at
/// `min_weight` and a geometric tail between them whose ratio is solved so the
/// weights sum to one. Both anchors are kept exactly.
ClassDistribution make_anchored_skew(std::size_t classes, double max_weight, double min_weight);

/// 19 classes, anchors 0.3476 / 0.0034 (rover terrain benchmark statistics).
ClassDistribution make_msl_like();
/// 8 classes, anchors 0.8139 / 0.0068 (orbital benchmark statistics).
ClassDistribution make_hirise_like();

/// Name-based factory used by the CLI: "uniform", "msl", "hirise".
ClassDistribution make_distribution(std::string_view name, std::size_t classes);

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

struct ImageShape {
  std::uint32_t height = 32;
  std::uint32_t width = 32;
  std::uint32_t channels = 3;

  std::size_t pixels() const { return std::size_t{height} * width * channels; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

struct ImageSample {
  std::vector<float> pixels;  // HWC row-major, every value in [0,1]
  std::uint32_t classId = 0;  // hidden label
  std::uint32_t domainId = 0;
  std::uint64_t sampleId = 0;

  friend bool operator==(const ImageSample&, const ImageSample&) = default;
};

struct Dataset {
  ImageShape shape;
  std::vector<ImageSample> samples;
  std::vector<Split> splits;
  ClassDistribution distribution;
  std::uint32_t domainId = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t class_count() const { return distribution.size(); }
  std::vector<std::size_t> indices(Split split) const;
  /// Copy of the samples tagged `split`, keeping shape, distribution and domain.
  Dataset subset(Split split) const;
  std::vector<std::uint32_t> labels() const;

  /// Throws std::invalid_argument when pixel range, class bounds, id
  /// uniqueness or array lengths are violated.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SynthesisSpec {
  std::uint32_t classCount = 5;
  std::uint32_t imageSize = 32;
  std::uint32_t channels = 3;
  std::size_t samples = 1000;
  double prototypeNoiseStd = 0.1;
  std::uint32_t overlapShiftMax = 2;
  std::uint32_t prototypeCells = 0;  // side of the coarse random grid; 0 = one cell per pixel
  std::uint32_t noiseCells = 0;      // 0: white pixel noise; otherwise noise constant on a noiseCells^2 grid
  double trainFraction = 0.7;
  double valFraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Class prototypes: uniform random base image per class (drawn on a
/// prototypeCells x prototypeCells grid and upsampled by nearest neighbour),
/// smoothed with a circular 3x3 box filter and contrast-stretched to [0,1].
std::vector<std::vector<float>> make_prototypes(const SynthesisSpec& spec);

/// Every sample is its class prototype circularly shifted by up to
/// `overlapShiftMax` pixels plus clamped Gaussian noise. Classes are drawn
/// i.i.d. from `dist`; splits are assigned by position (train, val, test).
Dataset generate_dataset(const SynthesisSpec& spec, const ClassDistribution& dist, std::uint32_t domainId);

/// Draws round(fractionA * totalN) samples from `a` and the remainder from
/// `b` (both without replacement), shuffles, and offsets b's class ids by
/// a.class_count(). The declared distribution is fractionA*p_a ++ (1-fractionA)*p_b.
Dataset mix_datasets(const Dataset& a, const Dataset& b, double fractionA, std::size_t totalN, std::uint64_t seed);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& d, std::ostream& os);
Dataset read_dataset(std::istream& is);

/// Plain binary PPM (P6) reader; returns HWC pixels scaled to [0,1].
std::vector<float> read_ppm(const std::filesystem::path& path, ImageShape& shape);

}  // namespace homocl

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "homocl/model.hpp"
#include "homocl/synthdata.hpp"

namespace homocl {

/// Frozen backbone features of a dataset, one row per sample.
struct FeatureTable {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> features;  // rows x dim
  std::vector<std::uint32_t> labels;
  std::vector<Split> splits;
  std::vector<std::uint64_t> imageIds;
  std::uint32_t classCount = 0;

  std::span<const float> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  std::vector<std::size_t> indices(Split split) const;
  void validate() const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

/// Center-view forward pass through the backbone; no augmentation.
FeatureTable extract_features(const EncoderShape& shape, std::span<const double> params, const Dataset& dataset);
FeatureTable extract_features(const Checkpoint& ckpt, const Dataset& dataset);

// "HFEA", u32 N, u32 F, f32[N*F], u32[N] labels,
// then u8[N] split tags, u32 classCount, u64[N] image ids.
void write_features(const FeatureTable& t, std::ostream& os);
FeatureTable read_features(std::istream& is);
void save_features(const FeatureTable& t, const std::filesystem::path& path);
FeatureTable load_features(const std::filesystem::path& path);

struct LinearConfig {
  std::size_t epochs = 300;  // full-batch steps
  double lr = 1e-2;
  double weightDecay = 0.0;
  std::size_t hiddenWidth = 0;  // 0: single affine map; otherwise a linear bottleneck of this width
  std::uint64_t seed = 0;
};

/// Standardization followed by an affine map (optionally through a linear
/// hidden layer). Weights are [out][in].
struct LinearHead {
  std::size_t inputDim = 0;
  std::size_t classCount = 0;
  std::size_t hiddenWidth = 0;
  std::vector<double> mean, scale;  // per input feature
  std::vector<double> hiddenW, hiddenB;
  std::vector<double> weight, bias;
  std::vector<std::uint32_t> missingClasses;  // absent from the training subsample

  std::vector<double> logits(std::span<const float> x) const;
  /// Argmax of the logits; ties go to the lowest class index.
  std::uint32_t predict(std::span<const float> x) const;

  friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

/// Per class, max(1, round(f * n_c)) rows drawn without replacement from
/// `candidates` (classes with no candidates stay empty). Result sorted.
std::vector<std::size_t> stratified_subsample(std::span<const std::uint32_t> labels,
                                              std::span<const std::size_t> candidates, double fraction,
                                              std::uint64_t seed);

/// Softmax cross-entropy on a stratified subsample of the train split,
/// minimized by full-batch Adam.
LinearHead train_linear(const FeatureTable& table, double labelFraction, const LinearConfig& cfg);

/// Top-1 accuracy in percent. Throws on an empty split.
double evaluate(const LinearHead& head, const FeatureTable& table, Split split);

struct Projection2D {
  std::vector<double> coords;        // rows x 2
  std::vector<double> variance;      // variance along each component
  std::vector<double> components;    // 2 x dim
};

/// Top two principal components of the mean-centred features. A missing
/// second direction (rank < 2) is zero-filled.
Projection2D export_projection_2d(const FeatureTable& table);
void write_projection_csv(const FeatureTable& table, const Projection2D& p, std::ostream& os);

}  // namespace homocl

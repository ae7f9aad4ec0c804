#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homocl/common.hpp"

namespace homocl {

inline constexpr std::size_t kConv1Width = 8;
inline constexpr std::size_t kConv2Width = 16;
inline constexpr std::size_t kFeatureWidth = 64;  // 2x2 regions x 16 channels
inline constexpr std::size_t kProjectionWidth = 128;
inline constexpr double kNormEpsilon = 1e-12;

/// Input geometry of the encoder. `viewSize` must be a multiple of 8 so the
/// two pooling stages leave an even grid for the 2x2 region pool.
struct EncoderShape {
  std::uint32_t channels = 3;
  std::uint32_t viewSize = 32;

  void validate() const;
  std::size_t view_pixels() const { return std::size_t{viewSize} * viewSize * channels; }
  friend bool operator==(const EncoderShape&, const EncoderShape&) = default;
};

struct ParamSlice {
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Canonical parameter order:
///   conv1.weight [8][3][3][C], conv1.bias [8],
///   conv2.weight [16][3][3][8], conv2.bias [16],
///   proj1.weight [128][64], proj1.bias [128],
///   proj2.weight [128][128], proj2.bias [128],
///   proj3.weight [128][128], proj3.bias [128].
struct ParamLayout {
  ParamSlice conv1W, conv1B, conv2W, conv2B, fc1W, fc1B, fc2W, fc2B, fc3W, fc3B;
  std::size_t total = 0;

  static ParamLayout for_channels(std::uint32_t channels);
};

/// He-uniform weights (Glorot for the last projection layer), zero biases.
std::vector<double> init_params(const EncoderShape& shape, std::uint64_t seed);

/// Cached activations of one forward pass. Rows of `z` are unit norm.
struct ForwardRecord {
  EncoderShape shape;
  std::size_t batch = 0;
  std::uint64_t paramsFingerprint = 0;
  std::vector<double> input;     // M x S x S x C
  std::vector<double> act1;      // relu(conv1), M x S x S x 8
  std::vector<double> pool1;     // M x S/2 x S/2 x 8
  std::vector<double> act2;      // relu(conv2), M x S/2 x S/2 x 16
  std::vector<double> pool2;     // M x S/4 x S/4 x 16
  std::vector<double> features;  // h, M x 64
  std::vector<double> hidden1;   // M x 128
  std::vector<double> hidden2;   // M x 128
  std::vector<double> unnormalized;  // u, M x 128
  std::vector<double> norms;         // |u| per row
  std::vector<double> projections;   // z, M x 128
};

std::uint64_t fingerprint(std::span<const double> params);

/// `views` holds `batch` images of shape.view_pixels() values each.
ForwardRecord forward(const EncoderShape& shape, std::span<const double> params, std::span<const double> views,
                      std::size_t batch);

/// Exact gradient of sum(gradZ * z) with respect to all parameters.
/// Throws StaleRecordError when `params` differ from the forward pass.
std::vector<double> backward(const ForwardRecord& record, std::span<const double> params,
                             std::span<const double> gradZ);

/// Backbone features h only, processed in chunks.
std::vector<double> encode_features(const EncoderShape& shape, std::span<const double> params,
                                    std::span<const double> views, std::size_t batch);

/// Gradient of z = u / (|u| + eps) pulled back to u.
void normalize_backward(std::span<const double> u, double norm, std::span<const double> gradZ,
                        std::span<double> gradU);

struct AdamConfig {
  double lr = 3e-4;
  double weightDecay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

template <std::floating_point T>
struct AdamState {
  AdamConfig config;
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t step = 0;

  static AdamState zeros(std::size_t n, const AdamConfig& cfg) { return {cfg, std::vector<T>(n, T(0)), std::vector<T>(n, T(0)), 0}; }
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Adam with L2 weight decay folded into the gradient (g + lambda * w).
/// Arithmetic is in double; results are stored back as T.
template <std::floating_point T>
void adam_step(std::span<T> params, std::span<const double> grads, AdamState<T>& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw DivergenceError("adam_step: non-finite gradient");
  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double w = params[i];
    const double g = grads[i] + c.weightDecay * w;
    const double m = c.beta1 * static_cast<double>(state.m[i]) + (1.0 - c.beta1) * g;
    const double v = c.beta2 * static_cast<double>(state.v[i]) + (1.0 - c.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    params[i] = static_cast<T>(w - c.lr * (m / bc1) / (std::sqrt(v / bc2) + c.eps));
  }
}

/// Encoder weights plus optimizer state, stored as f32.
struct Checkpoint {
  EncoderShape shape;
  std::vector<float> params;
  AdamState<float> adam;
  std::uint32_t epoch = 0;

  std::vector<double> params_f64() const { return {params.begin(), params.end()}; }
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint make_checkpoint(const EncoderShape& shape, std::span<const double> params, const AdamConfig& adam);

// "HCKP", u32 version, u64 P, f32[P] params, u64 adam step, f32[P] m, f32[P] v,
// then u32 channels, u32 viewSize, u32 epoch, f64 lr, weightDecay, beta1, beta2, eps.
void write_checkpoint(const Checkpoint& ckpt, std::ostream& os);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace homocl

#include "homocl/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "homocl/binary_io.hpp"
#include "homocl/kernels.hpp"

namespace homocl {

namespace k = kernels;

void EncoderShape::validate() const {
  if (channels < 1) throw std::invalid_argument("encoder: channels must be >= 1");
  if (viewSize < 8 || viewSize % 8 != 0) throw std::invalid_argument("encoder: viewSize must be a positive multiple of 8");
}

ParamLayout ParamLayout::for_channels(std::uint32_t channels) {
  ParamLayout l;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    ParamSlice s{off, n};
    off += n;
    return s;
  };
  l.conv1W = take(kConv1Width * 9 * channels);
  l.conv1B = take(kConv1Width);
  l.conv2W = take(kConv2Width * 9 * kConv1Width);
  l.conv2B = take(kConv2Width);
  l.fc1W = take(kProjectionWidth * kFeatureWidth);
  l.fc1B = take(kProjectionWidth);
  l.fc2W = take(kProjectionWidth * kProjectionWidth);
  l.fc2B = take(kProjectionWidth);
  l.fc3W = take(kProjectionWidth * kProjectionWidth);
  l.fc3B = take(kProjectionWidth);
  l.total = off;
  return l;
}

std::vector<double> init_params(const EncoderShape& shape, std::uint64_t seed) {
  shape.validate();
  const auto l = ParamLayout::for_channels(shape.channels);
  std::vector<double> p(l.total, 0.0);
  Rng rng = make_rng(seed, {kTagInit});
  auto fill = [&](const ParamSlice& s, double bound) {
    for (std::size_t i = 0; i < s.size; ++i) p[s.offset + i] = bound * (2.0 * uniform01(rng) - 1.0);
  };
  fill(l.conv1W, std::sqrt(6.0 / (9.0 * shape.channels)));
  fill(l.conv2W, std::sqrt(6.0 / (9.0 * kConv1Width)));
  fill(l.fc1W, std::sqrt(6.0 / kFeatureWidth));
  fill(l.fc2W, std::sqrt(6.0 / kProjectionWidth));
  fill(l.fc3W, std::sqrt(6.0 / (2.0 * kProjectionWidth)));
  return p;
}

std::uint64_t fingerprint(std::span<const double> params) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : params) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return h ^ params.size();
}

namespace {

std::span<const double> slice(std::span<const double> p, const ParamSlice& s) { return p.subspan(s.offset, s.size); }
std::span<double> slice(std::span<double> p, const ParamSlice& s) { return p.subspan(s.offset, s.size); }

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

void relu_mask(std::span<const double> act, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(act[i] > 0.0)) grad[i] = 0.0;
}

// Mean over each quadrant of a q2 x q2 x C grid -> 4*C features, index (qy*2+qx)*C + c.
void region_pool_forward(std::size_t grid, std::size_t channels, std::size_t batch, std::span<const double> in,
                         std::span<double> out) {
  const std::size_t half = grid / 2;
  const double scale = 1.0 / static_cast<double>(half * half);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* src = in.data() + n * grid * grid * channels;
    double* dst = out.data() + n * 4 * channels;
    std::fill(dst, dst + 4 * channels, 0.0);
    for (std::size_t y = 0; y < grid; ++y)
      for (std::size_t x = 0; x < grid; ++x) {
        double* q = dst + ((y / half) * 2 + x / half) * channels;
        const double* px = src + (y * grid + x) * channels;
        for (std::size_t c = 0; c < channels; ++c) q[c] += px[c];
      }
    for (std::size_t i = 0; i < 4 * channels; ++i) dst[i] *= scale;
  }
}

void region_pool_backward(std::size_t grid, std::size_t channels, std::size_t batch, std::span<const double> gradOut,
                          std::span<double> gradIn) {
  const std::size_t half = grid / 2;
  const double scale = 1.0 / static_cast<double>(half * half);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* go = gradOut.data() + n * 4 * channels;
    double* gi = gradIn.data() + n * grid * grid * channels;
    for (std::size_t y = 0; y < grid; ++y)
      for (std::size_t x = 0; x < grid; ++x) {
        const double* q = go + ((y / half) * 2 + x / half) * channels;
        double* px = gi + (y * grid + x) * channels;
        for (std::size_t c = 0; c < channels; ++c) px[c] = q[c] * scale;
      }
  }
}

void check_inputs(const EncoderShape& shape, std::span<const double> params, std::span<const double> views,
                  std::size_t batch) {
  shape.validate();
  if (batch == 0) throw std::invalid_argument("forward: empty batch");
  if (params.size() != ParamLayout::for_channels(shape.channels).total)
    throw std::invalid_argument("forward: parameter count does not match encoder shape");
  if (views.size() != batch * shape.view_pixels()) throw std::invalid_argument("forward: view buffer shape mismatch");
}

// Backbone up to h; fills the record's conv intermediates.
void backbone_forward(const EncoderShape& shape, const ParamLayout& l, std::span<const double> params,
                      ForwardRecord& r) {
  const std::size_t S = shape.viewSize, M = r.batch;
  const k::ConvGeom g1{S, S, shape.channels, kConv1Width};
  const k::ConvGeom g2{S / 2, S / 2, kConv1Width, kConv2Width};
  r.act1.resize(M * g1.out_size());
  k::conv3x3_forward(g1, M, r.input, slice(params, l.conv1W), slice(params, l.conv1B), r.act1);
  relu_inplace(r.act1);
  r.pool1.resize(M * g2.in_size());
  k::avgpool2_forward(S, S, kConv1Width, M, r.act1, r.pool1);
  r.act2.resize(M * g2.out_size());
  k::conv3x3_forward(g2, M, r.pool1, slice(params, l.conv2W), slice(params, l.conv2B), r.act2);
  relu_inplace(r.act2);
  r.pool2.resize(M * (S / 4) * (S / 4) * kConv2Width);
  k::avgpool2_forward(S / 2, S / 2, kConv2Width, M, r.act2, r.pool2);
  r.features.resize(M * kFeatureWidth);
  region_pool_forward(S / 4, kConv2Width, M, r.pool2, r.features);
}

}  // namespace

ForwardRecord forward(const EncoderShape& shape, std::span<const double> params, std::span<const double> views,
                      std::size_t batch) {
  check_inputs(shape, params, views, batch);
  const auto l = ParamLayout::for_channels(shape.channels);
  ForwardRecord r;
  r.shape = shape;
  r.batch = batch;
  r.paramsFingerprint = fingerprint(params);
  r.input.assign(views.begin(), views.end());
  backbone_forward(shape, l, params, r);

  const std::size_t M = batch, P = kProjectionWidth;
  r.hidden1.resize(M * P);
  k::dense_forward(M, kFeatureWidth, P, r.features, slice(params, l.fc1W), slice(params, l.fc1B), r.hidden1);
  relu_inplace(r.hidden1);
  r.hidden2.resize(M * P);
  k::dense_forward(M, P, P, r.hidden1, slice(params, l.fc2W), slice(params, l.fc2B), r.hidden2);
  relu_inplace(r.hidden2);
  r.unnormalized.resize(M * P);
  k::dense_forward(M, P, P, r.hidden2, slice(params, l.fc3W), slice(params, l.fc3B), r.unnormalized);

  r.norms.resize(M);
  r.projections.resize(M * P);
  for (std::size_t i = 0; i < M; ++i) {
    const double* u = r.unnormalized.data() + i * P;
    double ss = 0.0;
    for (std::size_t d = 0; d < P; ++d) ss += u[d] * u[d];
    r.norms[i] = std::sqrt(ss);
    const double inv = 1.0 / (r.norms[i] + kNormEpsilon);
    for (std::size_t d = 0; d < P; ++d) r.projections[i * P + d] = u[d] * inv;
  }
  return r;
}

void normalize_backward(std::span<const double> u, double norm, std::span<const double> gradZ,
                        std::span<double> gradU) {
  const double denom = norm + kNormEpsilon;
  double ug = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) ug += u[d] * gradZ[d];
  const double radial = norm > 0.0 ? ug / (norm * denom * denom) : 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) gradU[d] = gradZ[d] / denom - u[d] * radial;
}

std::vector<double> backward(const ForwardRecord& r, std::span<const double> params, std::span<const double> gradZ) {
  if (fingerprint(params) != r.paramsFingerprint)
    throw StaleRecordError("backward: record was produced with different parameters");
  const std::size_t M = r.batch, P = kProjectionWidth, S = r.shape.viewSize;
  if (gradZ.size() != M * P) throw std::invalid_argument("backward: gradZ shape mismatch");
  const auto l = ParamLayout::for_channels(r.shape.channels);
  std::vector<double> grads(l.total, 0.0);
  std::span<double> gspan(grads);

  std::vector<double> gu(M * P);
  for (std::size_t i = 0; i < M; ++i)
    normalize_backward(std::span(r.unnormalized).subspan(i * P, P), r.norms[i], gradZ.subspan(i * P, P),
                       std::span(gu).subspan(i * P, P));

  std::vector<double> gh2(M * P), gh1(M * P), gfeat(M * kFeatureWidth);
  k::dense_backward(M, P, P, r.hidden2, slice(params, l.fc3W), gu, gh2, slice(gspan, l.fc3W), slice(gspan, l.fc3B));
  relu_mask(r.hidden2, gh2);
  k::dense_backward(M, P, P, r.hidden1, slice(params, l.fc2W), gh2, gh1, slice(gspan, l.fc2W), slice(gspan, l.fc2B));
  relu_mask(r.hidden1, gh1);
  k::dense_backward(M, kFeatureWidth, P, r.features, slice(params, l.fc1W), gh1, gfeat, slice(gspan, l.fc1W),
                    slice(gspan, l.fc1B));

  std::vector<double> gpool2(r.pool2.size());
  region_pool_backward(S / 4, kConv2Width, M, gfeat, gpool2);
  std::vector<double> gact2(r.act2.size());
  k::avgpool2_backward(S / 2, S / 2, kConv2Width, M, gpool2, gact2);
  relu_mask(r.act2, gact2);
  const k::ConvGeom g2{S / 2, S / 2, kConv1Width, kConv2Width};
  std::vector<double> gpool1(r.pool1.size());
  k::conv3x3_backward(g2, M, r.pool1, slice(params, l.conv2W), gact2, gpool1, slice(gspan, l.conv2W),
                      slice(gspan, l.conv2B));
  std::vector<double> gact1(r.act1.size());
  k::avgpool2_backward(S, S, kConv1Width, M, gpool1, gact1);
  relu_mask(r.act1, gact1);
  const k::ConvGeom g1{S, S, r.shape.channels, kConv1Width};
  k::conv3x3_backward(g1, M, r.input, slice(params, l.conv1W), gact1, {}, slice(gspan, l.conv1W),
                      slice(gspan, l.conv1B));
  return grads;
}

std::vector<double> encode_features(const EncoderShape& shape, std::span<const double> params,
                                    std::span<const double> views, std::size_t batch) {
  check_inputs(shape, params, views, batch);
  const auto l = ParamLayout::for_channels(shape.channels);
  constexpr std::size_t kChunk = 256;
  std::vector<double> out(batch * kFeatureWidth);
  for (std::size_t start = 0; start < batch; start += kChunk) {
    const std::size_t n = std::min(kChunk, batch - start);
    ForwardRecord r;
    r.batch = n;
    const auto px = shape.view_pixels();
    r.input.assign(views.begin() + static_cast<std::ptrdiff_t>(start * px),
                   views.begin() + static_cast<std::ptrdiff_t>((start + n) * px));
    backbone_forward(shape, l, params, r);
    std::copy(r.features.begin(), r.features.end(), out.begin() + static_cast<std::ptrdiff_t>(start * kFeatureWidth));
  }
  return out;
}

Checkpoint make_checkpoint(const EncoderShape& shape, std::span<const double> params, const AdamConfig& adam) {
  Checkpoint c;
  c.shape = shape;
  c.params.assign(params.begin(), params.end());
  c.adam = AdamState<float>::zeros(params.size(), adam);
  return c;
}

void write_checkpoint(const Checkpoint& c, std::ostream& os) {
  io::write_magic(os, "HCKP");
  io::write_u32(os, kCheckpointVersion);
  io::write_u64(os, c.params.size());
  io::write_f32_array(os, c.params);
  io::write_u64(os, c.adam.step);
  io::write_f32_array(os, c.adam.m);
  io::write_f32_array(os, c.adam.v);
  io::write_u32(os, c.shape.channels);
  io::write_u32(os, c.shape.viewSize);
  io::write_u32(os, c.epoch);
  io::write_f64(os, c.adam.config.lr);
  io::write_f64(os, c.adam.config.weightDecay);
  io::write_f64(os, c.adam.config.beta1);
  io::write_f64(os, c.adam.config.beta2);
  io::write_f64(os, c.adam.config.eps);
}

Checkpoint read_checkpoint(std::istream& is) {
  io::Reader r(is, "checkpoint");
  r.expect_magic("HCKP");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  const std::uint64_t n = r.u64();
  if (n > (std::uint64_t{1} << 32)) r.fail("implausible parameter count");
  Checkpoint c;
  c.params.resize(n);
  r.f32_array(c.params);
  c.adam.step = r.u64();
  c.adam.m.resize(n);
  c.adam.v.resize(n);
  r.f32_array(c.adam.m);
  r.f32_array(c.adam.v);
  c.shape.channels = r.u32();
  c.shape.viewSize = r.u32();
  c.epoch = r.u32();
  c.adam.config.lr = r.f64();
  c.adam.config.weightDecay = r.f64();
  c.adam.config.beta1 = r.f64();
  c.adam.config.beta2 = r.f64();
  c.adam.config.eps = r.f64();
  try {
    c.shape.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  if (ParamLayout::for_channels(c.shape.channels).total != n) r.fail("parameter count does not match encoder layout");
  if (!r.at_end()) r.fail("trailing bytes");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_checkpoint(c, os);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  return read_checkpoint(is);
}

}  // namespace homocl

#include <algorithm>

#include "homocl/kernels.hpp"

// Straight transcriptions of the defining sums. Slow on purpose; only tests
// and the benchmark call these.
namespace homocl::kernels::reference {

namespace {

struct Idx {
  std::size_t H, W, C;
  std::size_t operator()(std::size_t n, std::size_t y, std::size_t x, std::size_t c) const {
    return ((n * H + y) * W + x) * C + c;
  }
};

}  // namespace

void conv3x3_forward(const ConvGeom& g, std::size_t batch, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out) {
  const Idx ii{g.height, g.width, g.inChannels}, oi{g.height, g.width, g.outChannels};
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t o = 0; o < g.outChannels; ++o)
      for (std::size_t y = 0; y < g.height; ++y)
        for (std::size_t x = 0; x < g.width; ++x) {
          double s = bias[o];
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const long iy = static_cast<long>(y) + ky - 1, ix = static_cast<long>(x) + kx - 1;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.height) || ix >= static_cast<long>(g.width)) continue;
              for (std::size_t c = 0; c < g.inChannels; ++c)
                s += weight[((o * 3 + ky) * 3 + kx) * g.inChannels + c] *
                     in[ii(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), c)];
            }
          out[oi(n, y, x, o)] = s;
        }
}

void conv3x3_backward(const ConvGeom& g, std::size_t batch, std::span<const double> in,
                      std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                      std::span<double> gradWeight, std::span<double> gradBias) {
  const Idx ii{g.height, g.width, g.inChannels}, oi{g.height, g.width, g.outChannels};
  const long H = static_cast<long>(g.height), W = static_cast<long>(g.width);
  for (std::size_t o = 0; o < g.outChannels; ++o) {
    double sb = 0.0;
    for (std::size_t n = 0; n < batch; ++n)
      for (std::size_t y = 0; y < g.height; ++y)
        for (std::size_t x = 0; x < g.width; ++x) sb += gradOut[oi(n, y, x, o)];
    gradBias[o] = sb;
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx)
        for (std::size_t c = 0; c < g.inChannels; ++c) {
          double s = 0.0;
          for (std::size_t n = 0; n < batch; ++n)
            for (long y = 0; y < H; ++y)
              for (long x = 0; x < W; ++x) {
                const long iy = y + ky - 1, ix = x + kx - 1;
                if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                s += gradOut[oi(n, static_cast<std::size_t>(y), static_cast<std::size_t>(x), o)] *
                     in[ii(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), c)];
              }
          gradWeight[((o * 3 + ky) * 3 + kx) * g.inChannels + c] = s;
        }
  }
  if (gradIn.empty()) return;
  // gather form: each input pixel collects from the outputs whose window covers it
  for (std::size_t n = 0; n < batch; ++n)
    for (long iy = 0; iy < H; ++iy)
      for (long ix = 0; ix < W; ++ix)
        for (std::size_t c = 0; c < g.inChannels; ++c) {
          double s = 0.0;
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const long y = iy - ky + 1, x = ix - kx + 1;
              if (y < 0 || x < 0 || y >= H || x >= W) continue;
              for (std::size_t o = 0; o < g.outChannels; ++o)
                s += gradOut[oi(n, static_cast<std::size_t>(y), static_cast<std::size_t>(x), o)] *
                     weight[((o * 3 + ky) * 3 + kx) * g.inChannels + c];
            }
          gradIn[ii(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), c)] = s;
        }
}

void avgpool2_forward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                      std::span<const double> in, std::span<double> out) {
  const Idx ii{height, width, channels}, oi{height / 2, width / 2, channels};
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t y = 0; y < height / 2; ++y)
      for (std::size_t x = 0; x < width / 2; ++x)
        for (std::size_t c = 0; c < channels; ++c) {
          double s = 0.0;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) s += in[ii(n, 2 * y + dy, 2 * x + dx, c)];
          out[oi(n, y, x, c)] = s / 4.0;
        }
}

void avgpool2_backward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                       std::span<const double> gradOut, std::span<double> gradIn) {
  const Idx ii{height, width, channels}, oi{height / 2, width / 2, channels};
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x)
        for (std::size_t c = 0; c < channels; ++c) gradIn[ii(n, y, x, c)] = gradOut[oi(n, y / 2, x / 2, c)] / 4.0;
}

void dense_forward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                   std::span<const double> weight, std::span<const double> bias, std::span<double> out) {
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t o = 0; o < outDim; ++o) {
      double s = bias[o];
      for (std::size_t i = 0; i < inDim; ++i) s += weight[o * inDim + i] * in[n * inDim + i];
      out[n * outDim + o] = s;
    }
}

void dense_backward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                    std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                    std::span<double> gradWeight, std::span<double> gradBias) {
  for (std::size_t o = 0; o < outDim; ++o) {
    double sb = 0.0;
    for (std::size_t n = 0; n < batch; ++n) sb += gradOut[n * outDim + o];
    gradBias[o] = sb;
    for (std::size_t i = 0; i < inDim; ++i) {
      double s = 0.0;
      for (std::size_t n = 0; n < batch; ++n) s += gradOut[n * outDim + o] * in[n * inDim + i];
      gradWeight[o * inDim + i] = s;
    }
  }
  if (gradIn.empty()) return;
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t i = 0; i < inDim; ++i) {
      double s = 0.0;
      for (std::size_t o = 0; o < outDim; ++o) s += gradOut[n * outDim + o] * weight[o * inDim + i];
      gradIn[n * inDim + i] = s;
    }
}

void gram(std::size_t rows, std::size_t dim, std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < rows; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += a[i * dim + d] * a[j * dim + d];
      out[i * rows + j] = s;
    }
}

void squared_distances(std::size_t points, std::size_t centroids, std::size_t dim, std::span<const double> x,
                       std::span<const double> c, std::span<double> out) {
  for (std::size_t p = 0; p < points; ++p)
    for (std::size_t k = 0; k < centroids; ++k) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += (x[p * dim + d] - c[k * dim + d]) * (x[p * dim + d] - c[k * dim + d]);
      out[p * centroids + k] = s;
    }
}

}  // namespace homocl::kernels::reference

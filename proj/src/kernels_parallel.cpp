#include <algorithm>
#include <vector>

#include "homocl/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace homocl::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

void conv3x3_forward(const ConvGeom& g, std::size_t batch, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out) {
  const std::size_t H = g.height, W = g.width, Ci = g.inChannels, Co = g.outChannels;
  const auto n_batch = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const double* src = in.data() + static_cast<std::size_t>(n) * g.in_size();
    double* dst = out.data() + static_cast<std::size_t>(n) * g.out_size();
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        double* px = dst + (y * W + x) * Co;
        std::copy(bias.begin(), bias.end(), px);
        const std::size_t kx_lo = x == 0 ? 1 : 0, kx_hi = x + 1 == W ? 2 : 3;
        const std::size_t run = (kx_hi - kx_lo) * Ci;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          if ((y == 0 && ky == 0) || (y + 1 == H && ky == 2)) continue;
          const double* in_run = src + ((y + ky - 1) * W + (x + kx_lo - 1)) * Ci;
          for (std::size_t o = 0; o < Co; ++o) px[o] += dot(in_run, weight.data() + ((o * 3 + ky) * 3 + kx_lo) * Ci, run);
        }
      }
  }
}

void conv3x3_backward(const ConvGeom& g, std::size_t batch, std::span<const double> in,
                      std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                      std::span<double> gradWeight, std::span<double> gradBias) {
  const std::size_t H = g.height, W = g.width, Ci = g.inChannels, Co = g.outChannels;
  const std::size_t wsize = g.weight_size();
  const std::size_t stride = wsize + Co;
  // Per-sample partial weight gradients, reduced below in sample order.
  std::vector<double> partial(batch * stride, 0.0);
  const bool want_in = !gradIn.empty();
  if (want_in) std::fill(gradIn.begin(), gradIn.end(), 0.0);
  const auto n_batch = static_cast<long>(batch);

#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double* src = in.data() + un * g.in_size();
    const double* gout = gradOut.data() + un * g.out_size();
    double* gin = want_in ? gradIn.data() + un * g.in_size() : nullptr;
    double* gw = partial.data() + un * stride;
    double* gb = gw + wsize;
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        const double* go = gout + (y * W + x) * Co;
        const std::size_t kx_lo = x == 0 ? 1 : 0, kx_hi = x + 1 == W ? 2 : 3;
        const std::size_t run = (kx_hi - kx_lo) * Ci;
        for (std::size_t o = 0; o < Co; ++o) gb[o] += go[o];
        for (std::size_t ky = 0; ky < 3; ++ky) {
          if ((y == 0 && ky == 0) || (y + 1 == H && ky == 2)) continue;
          const std::size_t in_off = ((y + ky - 1) * W + (x + kx_lo - 1)) * Ci;
          for (std::size_t o = 0; o < Co; ++o) {
            const double gval = go[o];
            if (gval == 0.0) continue;
            const std::size_t w_off = ((o * 3 + ky) * 3 + kx_lo) * Ci;
            axpy(gval, src + in_off, gw + w_off, run);
            if (gin) axpy(gval, weight.data() + w_off, gin + in_off, run);
          }
        }
      }
  }

  std::fill(gradWeight.begin(), gradWeight.end(), 0.0);
  std::fill(gradBias.begin(), gradBias.end(), 0.0);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* gw = partial.data() + n * stride;
    axpy(1.0, gw, gradWeight.data(), wsize);
    axpy(1.0, gw + wsize, gradBias.data(), Co);
  }
}

void avgpool2_forward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                      std::span<const double> in, std::span<double> out) {
  const std::size_t oh = height / 2, ow = width / 2;
  const auto n_batch = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const double* src = in.data() + static_cast<std::size_t>(n) * height * width * channels;
    double* dst = out.data() + static_cast<std::size_t>(n) * oh * ow * channels;
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const double* a = src + ((2 * y) * width + 2 * x) * channels;
        const double* b = a + channels;
        const double* c = a + width * channels;
        const double* d = c + channels;
        double* o = dst + (y * ow + x) * channels;
        for (std::size_t ch = 0; ch < channels; ++ch) o[ch] = 0.25 * (a[ch] + b[ch] + c[ch] + d[ch]);
      }
  }
}

void avgpool2_backward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                       std::span<const double> gradOut, std::span<double> gradIn) {
  const std::size_t oh = height / 2, ow = width / 2;
  const auto n_batch = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const double* go = gradOut.data() + static_cast<std::size_t>(n) * oh * ow * channels;
    double* gi = gradIn.data() + static_cast<std::size_t>(n) * height * width * channels;
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double* src = go + ((y / 2) * ow + x / 2) * channels;
        double* dst = gi + (y * width + x) * channels;
        for (std::size_t ch = 0; ch < channels; ++ch) dst[ch] = 0.25 * src[ch];
      }
  }
}

void dense_forward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                   std::span<const double> weight, std::span<const double> bias, std::span<double> out) {
  const auto n_batch = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const double* x = in.data() + static_cast<std::size_t>(n) * inDim;
    double* y = out.data() + static_cast<std::size_t>(n) * outDim;
    for (std::size_t o = 0; o < outDim; ++o) y[o] = bias[o] + dot(weight.data() + o * inDim, x, inDim);
  }
}

void dense_backward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                    std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                    std::span<double> gradWeight, std::span<double> gradBias) {
  const auto n_out = static_cast<long>(outDim);
#pragma omp parallel for schedule(static)
  for (long lo = 0; lo < n_out; ++lo) {
    const auto o = static_cast<std::size_t>(lo);
    double* gw = gradWeight.data() + o * inDim;
    std::fill(gw, gw + inDim, 0.0);
    double gb = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const double g = gradOut[n * outDim + o];
      gb += g;
      if (g != 0.0) axpy(g, in.data() + n * inDim, gw, inDim);
    }
    gradBias[o] = gb;
  }
  if (gradIn.empty()) return;
  const auto n_batch = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n_batch; ++n) {
    const double* go = gradOut.data() + static_cast<std::size_t>(n) * outDim;
    double* gi = gradIn.data() + static_cast<std::size_t>(n) * inDim;
    std::fill(gi, gi + inDim, 0.0);
    for (std::size_t o = 0; o < outDim; ++o)
      if (go[o] != 0.0) axpy(go[o], weight.data() + o * inDim, gi, inDim);
  }
}

void gram(std::size_t rows, std::size_t dim, std::span<const double> a, std::span<double> out) {
  const auto n_rows = static_cast<long>(rows);
#pragma omp parallel for schedule(static)
  for (long li = 0; li < n_rows; ++li) {
    const auto i = static_cast<std::size_t>(li);
    for (std::size_t j = 0; j < rows; ++j) out[i * rows + j] = dot(a.data() + i * dim, a.data() + j * dim, dim);
  }
}

void squared_distances(std::size_t points, std::size_t centroids, std::size_t dim, std::span<const double> x,
                       std::span<const double> c, std::span<double> out) {
  const auto n_points = static_cast<long>(points);
#pragma omp parallel for schedule(static)
  for (long lp = 0; lp < n_points; ++lp) {
    const auto p = static_cast<std::size_t>(lp);
    const double* xp = x.data() + p * dim;
    for (std::size_t k = 0; k < centroids; ++k) {
      const double* ck = c.data() + k * dim;
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = xp[d] - ck[d];
        s += diff * diff;
      }
      out[p * centroids + k] = s;
    }
  }
}

}  // namespace homocl::kernels

#pragma once

#include <cstddef>
#include <span>

// Dense numeric kernels used by the encoder, the loss and k-means.
//
// Tensors are flat row-major arrays. Images are HWC per sample, batches are
// samples laid out back to back. Convolution weights are OHWI
// ([out][ky][kx][in]); dense weights are [out][in].
//
// The functions in `homocl::kernels` fan out over batch rows with OpenMP and
// keep every reduction in a fixed order, so their output does not depend on
// the thread count. `homocl::kernels::reference` holds naive serial versions
// written independently of the parallel ones; tests compare the two.
namespace homocl::kernels {

struct ConvGeom {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t inChannels = 0;
  std::size_t outChannels = 0;

  std::size_t in_size() const { return height * width * inChannels; }
  std::size_t out_size() const { return height * width * outChannels; }
  std::size_t weight_size() const { return outChannels * 9 * inChannels; }
};

/// Number of OpenMP threads that kernels will use (1 without OpenMP).
int max_threads();
/// Sets the OpenMP thread count; no-op without OpenMP.
void set_threads(int n);

// 3x3 convolution, stride 1, zero padding 1.
void conv3x3_forward(const ConvGeom& g, std::size_t batch, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out);
/// gradIn may be empty (first layer). gradWeight / gradBias are overwritten.
void conv3x3_backward(const ConvGeom& g, std::size_t batch, std::span<const double> in,
                      std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                      std::span<double> gradWeight, std::span<double> gradBias);

// 2x2 average pooling, stride 2 (height and width must be even).
void avgpool2_forward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                      std::span<const double> in, std::span<double> out);
void avgpool2_backward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                       std::span<const double> gradOut, std::span<double> gradIn);

// y = W x + b per row.
void dense_forward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                   std::span<const double> weight, std::span<const double> bias, std::span<double> out);
/// gradIn may be empty. gradWeight / gradBias are overwritten.
void dense_backward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                    std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                    std::span<double> gradWeight, std::span<double> gradBias);

/// out[i][j] = <row_i, row_j>, rows x rows.
void gram(std::size_t rows, std::size_t dim, std::span<const double> a, std::span<double> out);

/// out[p][k] = squared Euclidean distance between point p and centroid k.
void squared_distances(std::size_t points, std::size_t centroids, std::size_t dim, std::span<const double> x,
                       std::span<const double> c, std::span<double> out);

namespace reference {

void conv3x3_forward(const ConvGeom& g, std::size_t batch, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out);
void conv3x3_backward(const ConvGeom& g, std::size_t batch, std::span<const double> in,
                      std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                      std::span<double> gradWeight, std::span<double> gradBias);
void avgpool2_forward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                      std::span<const double> in, std::span<double> out);
void avgpool2_backward(std::size_t height, std::size_t width, std::size_t channels, std::size_t batch,
                       std::span<const double> gradOut, std::span<double> gradIn);
void dense_forward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                   std::span<const double> weight, std::span<const double> bias, std::span<double> out);
void dense_backward(std::size_t batch, std::size_t inDim, std::size_t outDim, std::span<const double> in,
                    std::span<const double> weight, std::span<const double> gradOut, std::span<double> gradIn,
                    std::span<double> gradWeight, std::span<double> gradBias);
void gram(std::size_t rows, std::size_t dim, std::span<const double> a, std::span<double> out);
void squared_distances(std::size_t points, std::size_t centroids, std::size_t dim, std::span<const double> x,
                       std::span<const double> c, std::span<double> out);

}  // namespace reference
}  // namespace homocl::kernels

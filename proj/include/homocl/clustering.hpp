#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "homocl/model.hpp"
#include "homocl/synthdata.hpp"

namespace homocl {

struct ClusterModel {
  std::size_t dim = 0;
  std::vector<double> centroids;            // K x dim
  std::vector<std::uint32_t> assignments;   // per training point
  double inertia = 0.0;                     // sum of squared distances to the assigned centroid
  std::vector<double> inertiaHistory;       // one entry per assignment step
  std::size_t iterations = 0;

  std::size_t k() const { return dim == 0 ? 0 : centroids.size() / dim; }
};

struct KMeansConfig {
  std::size_t k = 5;
  std::size_t maxIters = 100;
  double tol = 1e-6;  // stop when no centroid moves more than this (Euclidean)
  std::uint64_t seed = 0;
  std::size_t restarts = 1;  // independent seedings; the lowest final inertia wins
};

/// k-means++ seeding followed by Lloyd iterations. An empty cluster is
/// re-seeded at the point farthest from its current centroid. With several
/// restarts, the run with the lowest inertia is kept (earliest on ties).
ClusterModel kmeans(std::span<const double> features, std::size_t n, std::size_t dim, const KMeansConfig& cfg);

/// Nearest centroid per row; ties go to the lowest centroid index.
std::vector<std::uint32_t> assign(const ClusterModel& model, std::span<const double> features, std::size_t dim);

/// Per-image cluster ids keyed by sampleId.
struct ClusterAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> imageIds;
  std::vector<std::uint32_t> clusterIds;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

struct ClusterStageConfig {
  std::size_t maxIters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::uint32_t viewSize = 32;
  std::size_t restarts = 1;
  bool standardize = true;  // z-score each feature dimension before k-means
};

/// Per-column z-score in place (constant columns become zero).
void standardize_columns(std::span<double> x, std::size_t dim);

/// Backbone features of un-augmented full-frame views, clustered with k-means.
ClusterAssignment cluster_stage(const Dataset& dataset, std::span<const double> params, std::size_t k,
                                const ClusterStageConfig& cfg);

// Text format: "# K=<K> seed=<seed>" then one "imageId,clusterId" per line.
void write_assignment(const ClusterAssignment& a, std::ostream& os);
ClusterAssignment read_assignment(std::istream& is);
void save_assignment(const ClusterAssignment& a, const std::filesystem::path& path);
ClusterAssignment load_assignment(const std::filesystem::path& path);

}  // namespace homocl

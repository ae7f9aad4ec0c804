#include "homocl/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "homocl/augment.hpp"
#include "homocl/kernels.hpp"

namespace homocl {

namespace {

// k-means++: first centre uniform, then proportional to squared distance.
std::vector<double> seed_plus_plus(std::span<const double> x, std::size_t n, std::size_t dim, std::size_t k, Rng& rng) {
  std::vector<double> centroids(k * dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = uniform_index(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > target && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
        while (d2[pick] == 0.0) --pick;  // acc overshoot on the last step
      } else {
        // all remaining points coincide with a centre: take an unused index
        std::vector<std::size_t> unused;
        for (std::size_t i = 0; i < n; ++i)
          if (!chosen[i]) unused.push_back(i);
        pick = unused[uniform_index(rng, unused.size())];
      }
    }
    chosen[pick] = 1;
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(pick * dim), dim,
                centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = x[i * dim + d] - centroids[c * dim + d];
        s += diff * diff;
      }
      d2[i] = std::min(d2[i], s);
    }
  }
  return centroids;
}

// Assignment step; returns inertia and fills per-point squared distance.
double assign_step(std::span<const double> x, std::size_t n, std::size_t dim, std::span<const double> centroids,
                   std::size_t k, std::vector<std::uint32_t>& labels, std::vector<double>& best) {
  std::vector<double> dist(n * k);
  kernels::squared_distances(n, k, dim, x, centroids, dist);
  labels.resize(n);
  best.resize(n);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t arg = 0;
    double b = dist[i * k];
    for (std::size_t c = 1; c < k; ++c)
      if (dist[i * k + c] < b) {
        b = dist[i * k + c];
        arg = static_cast<std::uint32_t>(c);
      }
    labels[i] = arg;
    best[i] = b;
    inertia += b;
  }
  return inertia;
}

ClusterModel kmeans_once(std::span<const double> features, std::size_t n, std::size_t dim, const KMeansConfig& cfg,
                         std::uint64_t restart) {
  const std::size_t k = cfg.k;
  Rng rng = make_rng(cfg.seed, {kTagKMeans, restart});

  ClusterModel m;
  m.dim = dim;
  m.centroids = seed_plus_plus(features, n, dim, k, rng);
  std::vector<double> best, next(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < std::max<std::size_t>(cfg.maxIters, 1); ++it) {
    m.inertia = assign_step(features, n, dim, m.centroids, k, m.assignments, best);
    m.inertiaHistory.push_back(m.inertia);
    m.iterations = it + 1;

    std::fill(next.begin(), next.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = m.assignments[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) next[c * dim + d] += features[i * dim + d];
    }
    std::vector<char> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t d = 0; d < dim; ++d) next[c * dim + d] /= static_cast<double>(counts[c]);
        continue;
      }
      // empty cluster: move it onto the worst-served point not used yet
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i] && best[i] > far_d) {
          far_d = best[i];
          far = i;
        }
      taken[far] = 1;
      best[far] = 0.0;
      std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(far * dim), dim,
                  next.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = next[c * dim + d] - m.centroids[c * dim + d];
        s += diff * diff;
      }
      shift = std::max(shift, std::sqrt(s));
    }
    m.centroids.swap(next);
    if (shift < cfg.tol) break;
  }
  // final assignment against the final centroids
  const double final_inertia = assign_step(features, n, dim, m.centroids, k, m.assignments, best);
  m.inertia = final_inertia;
  m.inertiaHistory.push_back(final_inertia);
  return m;
}

}  // namespace

ClusterModel kmeans(std::span<const double> features, std::size_t n, std::size_t dim, const KMeansConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  if (cfg.k > n) throw std::invalid_argument("kmeans: K exceeds the number of points");
  if (dim == 0 || features.size() != n * dim) throw std::invalid_argument("kmeans: feature shape mismatch");
  ClusterModel best = kmeans_once(features, n, dim, cfg, 0);
  for (std::size_t r = 1; r < cfg.restarts; ++r) {
    ClusterModel m = kmeans_once(features, n, dim, cfg, r);
    if (m.inertia < best.inertia) best = std::move(m);
  }
  return best;
}

std::vector<std::uint32_t> assign(const ClusterModel& model, std::span<const double> features, std::size_t dim) {
  if (dim != model.dim) throw std::invalid_argument("assign: feature dimension mismatch");
  if (features.size() % dim != 0) throw std::invalid_argument("assign: ragged feature buffer");
  std::vector<std::uint32_t> labels;
  std::vector<double> best;
  assign_step(features, features.size() / dim, dim, model.centroids, model.k(), labels, best);
  return labels;
}

void standardize_columns(std::span<double> x, std::size_t dim) {
  const std::size_t n = x.size() / dim;
  if (n == 0) return;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * dim + d];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (x[i * dim + d] - mean) * (x[i * dim + d] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i * dim + d] = sd > 1e-12 ? (x[i * dim + d] - mean) / sd : 0.0;
  }
}

ClusterAssignment cluster_stage(const Dataset& dataset, std::span<const double> params, std::size_t k,
                                const ClusterStageConfig& cfg) {
  const EncoderShape shape{dataset.shape.channels, cfg.viewSize};
  const auto views = stack_center_views(dataset, cfg.viewSize);
  auto features = encode_features(shape, params, views, dataset.size());
  if (cfg.standardize) standardize_columns(features, kFeatureWidth);
  const auto model = kmeans(features, dataset.size(), kFeatureWidth, {k, cfg.maxIters, cfg.tol, cfg.seed, cfg.restarts});
  ClusterAssignment a;
  a.k = k;
  a.seed = cfg.seed;
  a.clusterIds = model.assignments;
  a.imageIds.resize(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) a.imageIds[i] = dataset.samples[i].sampleId;
  return a;
}

void write_assignment(const ClusterAssignment& a, std::ostream& os) {
  os << "# K=" << a.k << " seed=" << a.seed << '\n';
  for (std::size_t i = 0; i < a.imageIds.size(); ++i) os << a.imageIds[i] << ',' << a.clusterIds[i] << '\n';
  if (!os) throw std::runtime_error("write failed");
}

ClusterAssignment read_assignment(std::istream& is) {
  ClusterAssignment a;
  std::string line;
  if (!std::getline(is, line)) throw TruncatedFileError("assignment: empty file");
  unsigned long long k = 0, seed = 0;
  if (std::sscanf(line.c_str(), "# K=%llu seed=%llu", &k, &seed) != 2) throw FormatError("assignment: bad header");
  a.k = k;
  a.seed = seed;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    unsigned long long id = 0, c = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu%c", &id, &c, &tail) != 2) throw FormatError("assignment: bad line: " + line);
    if (c >= k) throw FormatError("assignment: cluster id out of range");
    a.imageIds.push_back(id);
    a.clusterIds.push_back(static_cast<std::uint32_t>(c));
  }
  return a;
}

void save_assignment(const ClusterAssignment& a, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_assignment(a, os);
}

ClusterAssignment load_assignment(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  return read_assignment(is);
}

}  // namespace homocl

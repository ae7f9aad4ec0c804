#include "homocl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "homocl/common.hpp"
#include "homocl/kernels.hpp"

namespace homocl {

BatchIndex BatchIndex::sibling_pairs(std::size_t images) {
  BatchIndex b;
  b.sourceImage.resize(2 * images);
  for (std::size_t i = 0; i < 2 * images; ++i) b.sourceImage[i] = i / 2;
  return b;
}

BatchIndex BatchIndex::with_clusters(std::span<const std::int64_t> imageClusters) {
  BatchIndex b = sibling_pairs(imageClusters.size());
  b.clusterId.resize(b.sourceImage.size());
  for (std::size_t i = 0; i < b.clusterId.size(); ++i) b.clusterId[i] = imageClusters[i / 2];
  return b;
}

BatchIndex BatchIndex::with_view_clusters(std::span<const std::int64_t> viewClusters) {
  if (viewClusters.size() % 2 != 0) throw std::invalid_argument("BatchIndex: view count must be even");
  BatchIndex b = sibling_pairs(viewClusters.size() / 2);
  b.clusterId.assign(viewClusters.begin(), viewClusters.end());
  b.viewLevelClusters = true;
  return b;
}

void BatchIndex::validate() const {
  const std::size_t m = views();
  if (m == 0 || m % 2 != 0) throw std::invalid_argument("BatchIndex: view count must be even and positive");
  if (has_clusters() && clusterId.size() != m) throw std::invalid_argument("BatchIndex: clusterId length mismatch");
  std::map<std::uint64_t, std::vector<std::size_t>> seen;
  for (std::size_t i = 0; i < m; ++i) seen[sourceImage[i]].push_back(i);
  for (const auto& [img, slots] : seen) {
    if (slots.size() != 2) throw std::invalid_argument("BatchIndex: every source image must contribute exactly two views");
    if (has_clusters() && !viewLevelClusters && clusterId[slots[0]] != clusterId[slots[1]])
      throw std::invalid_argument("BatchIndex: sibling views must share a cluster id");
  }
}

std::size_t BatchIndex::sibling(std::size_t i) const {
  // adjacent layout first, then a scan for arbitrary orderings
  const std::size_t guess = i ^ 1u;
  if (guess < views() && sourceImage[guess] == sourceImage[i]) return guess;
  for (std::size_t k = 0; k < views(); ++k)
    if (k != i && sourceImage[k] == sourceImage[i]) return k;
  throw std::invalid_argument("BatchIndex: view has no sibling");
}

std::size_t PairLabelMatrix::count(PairLabel l) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l)); }
std::size_t PairLabelMatrix::count(PairTruth t) const { return static_cast<std::size_t>(std::count(truth.begin(), truth.end(), t)); }

PairLabelMatrix pseudo_label_matrix(const BatchIndex& batch, bool useClusters, std::span<const std::uint32_t> viewClasses) {
  batch.validate();
  if (useClusters && !batch.has_clusters()) throw std::invalid_argument("pseudo_label_matrix: cluster ids required");
  const std::size_t m = batch.views();
  if (!viewClasses.empty() && viewClasses.size() != m)
    throw std::invalid_argument("pseudo_label_matrix: one hidden class per view required");
  PairLabelMatrix out;
  out.size = m;
  out.labels.resize(m * m);
  if (!viewClasses.empty()) out.truth.resize(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      PairLabel l;
      if (i == j) {
        l = PairLabel::self;
      } else if (useClusters) {
        l = batch.clusterId[i] == batch.clusterId[j] ? PairLabel::positive : PairLabel::negative;
      } else {
        l = batch.sourceImage[i] == batch.sourceImage[j] ? PairLabel::positive : PairLabel::negative;
      }
      out.labels[i * m + j] = l;
      if (viewClasses.empty()) continue;
      const bool same = viewClasses[i] == viewClasses[j];
      PairTruth t = PairTruth::self;
      if (l == PairLabel::positive) t = same ? PairTruth::true_positive : PairTruth::false_positive;
      if (l == PairLabel::negative) t = same ? PairTruth::false_negative : PairTruth::true_negative;
      out.truth[i * m + j] = t;
    }
  return out;
}

void LossConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw std::invalid_argument("loss: temperature must be > 0");
}

PositiveMode parse_positive_mode(std::string_view s) {
  if (s == "sibling_only") return PositiveMode::sibling_only;
  if (s == "cluster_extended") return PositiveMode::cluster_extended;
  throw std::invalid_argument("unknown positive mode: " + std::string(s));
}

EmptyNegativePolicy parse_empty_negative_policy(std::string_view s) {
  if (s == "skip_anchor") return EmptyNegativePolicy::skip_anchor;
  if (s == "error") return EmptyNegativePolicy::error;
  throw std::invalid_argument("unknown empty-negative policy: " + std::string(s));
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_sim: dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) {
    uv += u[d] * v[d];
    uu += u[d] * u[d];
    vv += v[d] * v[d];
  }
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine_sim: zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

namespace {

enum class Denominator { all_but_self, other_clusters };

// Shared core of both losses. For anchor i with denominator set D_i and
// positive weights w_p (summing to 1):
//   l_i = -sum_p w_p s_ip / t + log sum_{k in D_i} exp(s_ik / t)
//   dl_i/ds_ik = (softmax_{D_i}(s_i./t)_k - w_k) / t
LossResult contrastive_loss(std::span<const double> Z, std::size_t dim, const BatchIndex& batch, const LossConfig& cfg,
                            Denominator mode) {
  cfg.validate();
  batch.validate();
  const std::size_t m = batch.views();
  if (dim == 0 || Z.size() != m * dim) throw std::invalid_argument("contrastive loss: Z shape mismatch");
  if (mode == Denominator::other_clusters && !batch.has_clusters())
    throw std::invalid_argument("cluster-aware loss: cluster ids required");

  // normalized rows
  std::vector<double> zhat(m * dim), norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double ss = 0.0;
    for (std::size_t d = 0; d < dim; ++d) ss += Z[i * dim + d] * Z[i * dim + d];
    if (!(ss > 0.0)) throw std::invalid_argument("contrastive loss: zero embedding row");
    norms[i] = std::sqrt(ss);
    for (std::size_t d = 0; d < dim; ++d) zhat[i * dim + d] = Z[i * dim + d] / norms[i];
  }
  std::vector<double> sim(m * m);
  kernels::gram(m, dim, zhat, sim);

  const double inv_t = 1.0 / cfg.temperature;
  const bool extended = mode == Denominator::other_clusters && cfg.positiveMode == PositiveMode::cluster_extended;
  std::vector<double> coef(m * m, 0.0);  // dL_sum / ds_ik from anchor i
  LossResult res;
  res.perAnchor.assign(m, 0.0);
  std::vector<char> in_denominator(m);
  std::vector<double> logits(m);

  for (std::size_t i = 0; i < m; ++i) {
    std::size_t n_den = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const bool keep = mode == Denominator::all_but_self ? k != i : batch.clusterId[k] != batch.clusterId[i];
      in_denominator[k] = keep ? 1 : 0;
      n_den += keep ? 1u : 0u;
    }
    if (n_den == 0) {
      if (cfg.emptyNegativePolicy == EmptyNegativePolicy::error)
        throw DegenerateBatchError("cluster-aware loss: anchor " + std::to_string(i) + " has no negatives");
      ++res.skippedAnchors;
      continue;
    }
    ++res.activeAnchors;

    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k)
      if (in_denominator[k]) {
        logits[k] = sim[i * m + k] * inv_t;
        mx = std::max(mx, logits[k]);
      }
    double z = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (in_denominator[k]) z += std::exp(logits[k] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < m; ++k)
      if (in_denominator[k]) coef[i * m + k] += std::exp(logits[k] - lse) * inv_t;

    double positive = 0.0;
    if (extended) {
      std::size_t n_pos = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (k != i && batch.clusterId[k] == batch.clusterId[i]) ++n_pos;
      // a view alone in its cluster keeps its sibling as the positive
      const std::size_t j = batch.sibling(i);
      const double w = n_pos > 0 ? 1.0 / static_cast<double>(n_pos) : 1.0;
      for (std::size_t k = 0; k < m; ++k)
        if (k != i && (n_pos > 0 ? batch.clusterId[k] == batch.clusterId[i] : k == j)) {
          positive += w * sim[i * m + k] * inv_t;
          coef[i * m + k] -= w * inv_t;
        }
    } else {
      const std::size_t j = batch.sibling(i);
      positive = sim[i * m + j] * inv_t;
      coef[i * m + j] -= inv_t;
    }
    res.perAnchor[i] = lse - positive;
  }

  if (res.activeAnchors == 0)
    throw DegenerateBatchError("cluster-aware loss: every anchor lost its negatives (whole batch in one cluster)");

  const double scale = 1.0 / static_cast<double>(res.activeAnchors);
  double total = 0.0;
  for (double l : res.perAnchor) total += l;
  res.loss = total * scale;

  // dL/dzhat_i = sum_k (coef_ik + coef_ki) zhat_k, then through the row normalization.
  res.grad.assign(m * dim, 0.0);
  std::vector<double> g(dim);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double c = (coef[i * m + k] + coef[k * m + i]) * scale;
      if (c == 0.0) continue;
      for (std::size_t d = 0; d < dim; ++d) g[d] += c * zhat[k * dim + d];
    }
    double radial = 0.0;
    for (std::size_t d = 0; d < dim; ++d) radial += g[d] * zhat[i * dim + d];
    for (std::size_t d = 0; d < dim; ++d) res.grad[i * dim + d] = (g[d] - radial * zhat[i * dim + d]) / norms[i];
  }
  return res;
}

}  // namespace

LossResult ntxent(std::span<const double> Z, std::size_t dim, const BatchIndex& batch, const LossConfig& cfg) {
  return contrastive_loss(Z, dim, batch, cfg, Denominator::all_but_self);
}

LossResult cluster_aware_ntxent(std::span<const double> Z, std::size_t dim, const BatchIndex& batch,
                                const LossConfig& cfg) {
  return contrastive_loss(Z, dim, batch, cfg, Denominator::other_clusters);
}

}  // namespace homocl

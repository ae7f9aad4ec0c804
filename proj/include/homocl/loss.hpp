#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace homocl {

/// View slots of one contrastive batch. Views 2b and 2b+1 come from the
/// same source image unless built otherwise.
struct BatchIndex {
  std::vector<std::uint64_t> sourceImage;  // per view
  std::vector<std::int64_t> clusterId;     // per view; empty when clustering is off
  bool viewLevelClusters = false;          // siblings may sit in different clusters

  std::size_t views() const { return sourceImage.size(); }
  bool has_clusters() const { return !clusterId.empty(); }

  /// B images, two adjacent views each.
  static BatchIndex sibling_pairs(std::size_t images);
  /// Sibling layout with a per-image cluster id copied onto both views.
  static BatchIndex with_clusters(std::span<const std::int64_t> imageClusters);
  /// Sibling layout with one cluster id per view. With all ids distinct the
  /// cluster-aware denominator is exactly the plain one.
  static BatchIndex with_view_clusters(std::span<const std::int64_t> viewClusters);

  /// M even, every source image appears exactly twice, siblings share a
  /// cluster unless viewLevelClusters is set.
  void validate() const;
  /// Index of the other view of i's source image.
  std::size_t sibling(std::size_t i) const;
};

enum class PairLabel : std::uint8_t { self, positive, negative };
enum class PairTruth : std::uint8_t { self, true_positive, true_negative, false_negative, false_positive };

/// M x M pseudo-labels; `truth` is filled only when hidden classes are given.
struct PairLabelMatrix {
  std::size_t size = 0;
  std::vector<PairLabel> labels;
  std::vector<PairTruth> truth;

  PairLabel at(std::size_t i, std::size_t j) const { return labels[i * size + j]; }
  PairTruth truth_at(std::size_t i, std::size_t j) const { return truth[i * size + j]; }
  std::size_t count(PairLabel l) const;
  std::size_t count(PairTruth t) const;
};

/// Sibling mode: POSITIVE iff same source image. Cluster mode: POSITIVE iff
/// same cluster id. Diagonal is SELF. `viewClasses` (hidden labels, per view)
/// adds the diagnostic overlay.
PairLabelMatrix pseudo_label_matrix(const BatchIndex& batch, bool useClusters,
                                    std::span<const std::uint32_t> viewClasses = {});

enum class PositiveMode { sibling_only, cluster_extended };
enum class EmptyNegativePolicy { skip_anchor, error };

struct LossConfig {
  double temperature = 0.5;
  PositiveMode positiveMode = PositiveMode::sibling_only;
  EmptyNegativePolicy emptyNegativePolicy = EmptyNegativePolicy::skip_anchor;

  void validate() const;
};

PositiveMode parse_positive_mode(std::string_view s);
EmptyNegativePolicy parse_empty_negative_policy(std::string_view s);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dZ, same layout as Z
  std::vector<double> perAnchor;  // 0 for skipped anchors
  std::size_t activeAnchors = 0;
  std::size_t skippedAnchors = 0;
};

/// u.v / (|u||v|), clamped to [-1, 1]. Throws on a zero vector.
double cosine_sim(std::span<const double> u, std::span<const double> v);

/// NT-Xent: per anchor -log(exp(s_ij/t) / sum_{k != i} exp(s_ik/t)) with j the
/// sibling view, averaged over the M anchors. Rows of Z need not be unit norm;
/// similarities are cosine. Gradient is with respect to the raw rows.
LossResult ntxent(std::span<const double> Z, std::size_t dim, const BatchIndex& batch, const LossConfig& cfg);

/// Cluster-aware NT-Xent: the denominator keeps only views whose cluster
/// differs from the anchor's; the numerator is the sibling term (or, with
/// PositiveMode::cluster_extended, the mean logit over same-cluster views).
/// Anchors with no negatives are skipped or rejected per the policy; a batch
/// where every anchor is skipped raises DegenerateBatchError.
LossResult cluster_aware_ntxent(std::span<const double> Z, std::size_t dim, const BatchIndex& batch,
                                const LossConfig& cfg);

}  // namespace homocl

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homocl/synthdata.hpp"

namespace homocl {

enum class FnMode { iid, finite_dataset };

FnMode parse_fn_mode(std::string_view s);
std::string_view to_string(FnMode m);

struct FnReport {
  double meanFnPercent = 0.0;  // share of all unordered view pairs
  double stdError = 0.0;
  std::size_t batchesSimulated = 0;
  FnMode mode = FnMode::iid;
  std::size_t batchSize = 0;
  std::size_t datasetSize = 0;  // 0 in iid mode
  std::size_t classCount = 0;
};

/// Expected false-negative share (percent) of the B(2B-1) unordered view
/// pairs of a batch of B images with two views each, classes drawn i.i.d.:
/// 100 * 2(B-1)/(2B-1) * sum_c p_c^2.
double analytic_fn_rate(const ClassDistribution& dist, std::size_t batchSize);

/// Number of cross-image view pairs sharing a class: 4 * sum_c C(n_c, 2).
std::uint64_t count_fn_pairs(std::span<const std::uint32_t> batchClasses);

/// FN percent of one batch given the hidden class of each source image.
double batch_fn_percent(std::span<const std::uint32_t> batchClasses);

/// i.i.d. source classes from `dist`.
FnReport simulate_fn_rate(const ClassDistribution& dist, std::size_t batchSize, std::size_t batches,
                          std::uint64_t seed);

/// Source images drawn uniformly without replacement from a finite label list.
FnReport simulate_fn_rate(std::span<const std::uint32_t> labels, std::size_t batchSize, std::size_t batches,
                          std::uint64_t seed);

/// `n` i.i.d. labels from `dist` (a stand-in for a dataset's hidden classes).
std::vector<std::uint32_t> sample_labels(const ClassDistribution& dist, std::size_t n, std::uint64_t seed);

enum class SweepAxis { dataset_size, batch_size, class_count };

SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepAxis a);

struct SweepParams {
  ClassDistribution distribution = make_uniform_distribution(100);  // ignored on the class_count axis
  std::size_t batchSize = 128;
  std::size_t datasetSize = 0;  // 0: i.i.d. draws; otherwise a finite label list of this size
  std::size_t batches = 1000;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double value = 0.0;
  double analyticPercent = 0.0;
  FnReport report;
};

/// One simulation per grid value. The class_count axis uses uniform
/// distributions; the dataset_size axis always samples a finite label list.
std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> grid, const SweepParams& params);

void write_sweep_csv(SweepAxis axis, std::span<const SweepRow> rows, std::ostream& os);

}  // namespace homocl

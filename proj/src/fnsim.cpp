#include "homocl/fnsim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace homocl {

FnMode parse_fn_mode(std::string_view s) {
  if (s == "iid") return FnMode::iid;
  if (s == "finite" || s == "finite_dataset") return FnMode::finite_dataset;
  throw std::invalid_argument("unknown fnsim mode: " + std::string(s));
}

std::string_view to_string(FnMode m) { return m == FnMode::iid ? "iid" : "finite_dataset"; }

double analytic_fn_rate(const ClassDistribution& dist, std::size_t batchSize) {
  if (batchSize < 2) throw std::invalid_argument("analytic_fn_rate: batch size must be >= 2");
  const double b = static_cast<double>(batchSize);
  return 100.0 * (2.0 * (b - 1.0) / (2.0 * b - 1.0)) * dist.collision_probability();
}

std::uint64_t count_fn_pairs(std::span<const std::uint32_t> batchClasses) {
  std::vector<std::uint32_t> sorted(batchClasses.begin(), batchClasses.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::uint64_t n = j - i;
    total += 2 * n * (n - 1);  // 4 * C(n, 2)
    i = j;
  }
  return total;
}

double batch_fn_percent(std::span<const std::uint32_t> batchClasses) {
  const std::uint64_t b = batchClasses.size();
  if (b < 2) throw std::invalid_argument("batch_fn_percent: batch size must be >= 2");
  return 100.0 * static_cast<double>(count_fn_pairs(batchClasses)) / static_cast<double>(b * (2 * b - 1));
}

namespace {

FnReport summarize(const std::vector<double>& perBatch, FnMode mode, std::size_t b, std::size_t n, std::size_t k) {
  FnReport r;
  r.mode = mode;
  r.batchSize = b;
  r.datasetSize = n;
  r.classCount = k;
  r.batchesSimulated = perBatch.size();
  double mean = 0.0;
  for (double v : perBatch) mean += v;
  mean /= static_cast<double>(perBatch.size());
  double ss = 0.0;
  for (double v : perBatch) ss += (v - mean) * (v - mean);
  r.meanFnPercent = mean;
  if (perBatch.size() > 1)
    r.stdError = std::sqrt(ss / static_cast<double>(perBatch.size() - 1) / static_cast<double>(perBatch.size()));
  return r;
}

// Floyd's algorithm: `count` distinct indices from [0, n).
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t count, Rng& rng) {
  std::unordered_set<std::size_t> seen;
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    const std::size_t pick = seen.insert(t).second ? t : j;
    if (pick == j) seen.insert(j);
    out.push_back(pick);
  }
  return out;
}

}  // namespace

FnReport simulate_fn_rate(const ClassDistribution& dist, std::size_t batchSize, std::size_t batches,
                          std::uint64_t seed) {
  if (batchSize < 2) throw std::invalid_argument("simulate_fn_rate: batch size must be >= 2");
  if (batches < 1) throw std::invalid_argument("simulate_fn_rate: need at least one batch");
  std::vector<double> per(batches);
  const auto nb = static_cast<long>(batches);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nb; ++t) {
    Rng rng = make_rng(seed, {kTagFnBatch, static_cast<std::uint64_t>(t)});
    std::vector<std::uint32_t> classes(batchSize);
    for (auto& c : classes) c = dist.sample(rng);
    per[t] = batch_fn_percent(classes);
  }
  return summarize(per, FnMode::iid, batchSize, 0, dist.size());
}

FnReport simulate_fn_rate(std::span<const std::uint32_t> labels, std::size_t batchSize, std::size_t batches,
                          std::uint64_t seed) {
  if (batchSize < 2) throw std::invalid_argument("simulate_fn_rate: batch size must be >= 2");
  if (labels.size() < batchSize) throw std::invalid_argument("simulate_fn_rate: dataset smaller than the batch");
  if (batches < 1) throw std::invalid_argument("simulate_fn_rate: need at least one batch");
  std::vector<double> per(batches);
  const auto nb = static_cast<long>(batches);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nb; ++t) {
    Rng rng = make_rng(seed, {kTagFnBatch, static_cast<std::uint64_t>(t)});
    std::vector<std::uint32_t> classes;
    classes.reserve(batchSize);
    for (std::size_t i : draw_distinct(labels.size(), batchSize, rng)) classes.push_back(labels[i]);
    per[t] = batch_fn_percent(classes);
  }
  const std::uint32_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  return summarize(per, FnMode::finite_dataset, batchSize, labels.size(), k);
}

std::vector<std::uint32_t> sample_labels(const ClassDistribution& dist, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {kTagLabels});
  std::vector<std::uint32_t> out(n);
  for (auto& c : out) c = dist.sample(rng);
  return out;
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "datasetSize" || s == "dataset_size") return SweepAxis::dataset_size;
  if (s == "batchSize" || s == "batch_size") return SweepAxis::batch_size;
  if (s == "classCount" || s == "class_count") return SweepAxis::class_count;
  throw std::invalid_argument("unknown sweep axis: " + std::string(s));
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::dataset_size: return "datasetSize";
    case SweepAxis::batch_size: return "batchSize";
    case SweepAxis::class_count: return "classCount";
  }
  return "?";
}

std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> grid, const SweepParams& params) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double value = grid[g];
    if (!(value >= 1.0)) throw std::invalid_argument("sweep: grid values must be >= 1");
    const auto v = static_cast<std::size_t>(std::llround(value));
    ClassDistribution dist = params.distribution;
    std::size_t b = params.batchSize, n = params.datasetSize;
    switch (axis) {
      case SweepAxis::dataset_size: n = v; break;
      case SweepAxis::batch_size: b = v; break;
      case SweepAxis::class_count: dist = make_uniform_distribution(v); break;
    }
    const std::uint64_t seed = stream_seed(params.seed, {g});
    SweepRow row;
    row.value = value;
    row.analyticPercent = analytic_fn_rate(dist, b);
    if (n == 0) {
      row.report = simulate_fn_rate(dist, b, params.batches, seed);
    } else {
      const auto labels = sample_labels(dist, n, seed);
      row.report = simulate_fn_rate(labels, b, params.batches, seed);
      row.report.classCount = dist.size();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(SweepAxis axis, std::span<const SweepRow> rows, std::ostream& os) {
  os << to_string(axis) << ",meanFnPercent,stdError,analyticPercent,batches,mode,batchSize,datasetSize,classCount\n";
  for (const auto& r : rows)
    os << r.value << ',' << r.report.meanFnPercent << ',' << r.report.stdError << ',' << r.analyticPercent << ','
       << r.report.batchesSimulated << ',' << to_string(r.report.mode) << ',' << r.report.batchSize << ','
       << r.report.datasetSize << ',' << r.report.classCount << '\n';
}

}  // namespace homocl

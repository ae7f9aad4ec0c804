#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homocl/augment.hpp"
#include "homocl/clustering.hpp"
#include "homocl/lineval.hpp"
#include "homocl/loss.hpp"
#include "homocl/model.hpp"
#include "homocl/synthdata.hpp"

namespace homocl {

enum class TrainMode { baseline, cluster_aware, mixed_domain };

TrainMode parse_train_mode(std::string_view s);
std::string_view to_string(TrainMode m);

struct TrainConfig {
  TrainMode mode = TrainMode::baseline;
  std::size_t epochs = 40;
  std::size_t batchSize = 64;
  LossConfig loss;
  AdamConfig adam;
  AugmentConfig augment;
  std::size_t k = 5;
  std::size_t kmeansIters = 100;
  double kmeansTol = 1e-6;
  std::size_t kmeansRestarts = 10;
  std::size_t reclusterEvery = 0;  // 0: cluster once before the first epoch
  std::filesystem::path dataset;   // target domain
  std::filesystem::path secondary; // second domain for mixed_domain
  double fractionA = 0.5;
  std::uint64_t seed = 0;
  std::filesystem::path outDir;    // empty: nothing written

  void validate() const;
};

/// Overlays keys from a JSON object onto `cfg`. Nested objects `augment`,
/// `loss`, `adam` and dotted keys such as "augment.flipProb" are accepted;
/// unknown keys are an error.
void apply_json_config(TrainConfig& cfg, std::string_view json);
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});

struct EpochMetrics {
  std::uint32_t epoch = 0;
  double meanLoss = 0.0;
  std::size_t steps = 0;
  std::size_t skippedAnchors = 0;
  std::size_t activeAnchors = 0;
};

std::string to_json_line(const EpochMetrics& m);

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<EpochMetrics> metrics;
  std::optional<ClusterAssignment> clusters;
  std::size_t trainImages = 0;
  ClassDistribution trainDistribution;  // declared class distribution of the images trained on
};

/// Contrastive pretraining on the train split of `target` (mixed with the
/// train split of `secondary` in mixed_domain mode). `resume`, when given,
/// continues from its epoch with its parameters and optimizer state.
PretrainResult pretrain(const TrainConfig& cfg, const Dataset& target, const Dataset* secondary = nullptr,
                        const Checkpoint* resume = nullptr);
/// Loads the datasets named in the config.
PretrainResult pretrain(const TrainConfig& cfg);

/// The images a run trains on: train split of `target`, or the mix.
Dataset training_set(const TrainConfig& cfg, const Dataset& target, const Dataset* secondary);

/// Frozen-feature linear evaluation of an encoder on `dataset`'s test split.
double linear_eval_accuracy(const Checkpoint& ckpt, const Dataset& dataset, double labelFraction,
                            const LinearConfig& cfg);

struct KSweepRow {
  std::size_t k = 0;
  std::vector<double> accuracy;  // one per dataset; NaN when failed
  bool failed = false;
  std::string reason;
};

/// One cluster-aware pretrain + linear evaluation per (K, dataset).
std::vector<KSweepRow> k_sweep(const TrainConfig& base, std::span<const std::size_t> kGrid,
                               std::span<const Dataset> datasets, const LinearConfig& linear);
void write_k_sweep_csv(std::span<const KSweepRow> rows, std::span<const std::string> datasetNames, std::ostream& os);

/// Desk-scale settings shared by the scripted experiments.
struct ExperimentConfig {
  TrainConfig train;
  SynthesisSpec target;           // in-domain synthetic data
  std::vector<double> targetWeights{0.35, 0.25, 0.18, 0.12, 0.10};
  SynthesisSpec secondary;        // heterogeneous out-of-domain data
  LinearConfig linear;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> labelFractions{0.05, 0.10, 0.25, 0.5, 1.0};
  std::vector<std::size_t> kGrid{1, 2, 5, 20, 50};
  std::size_t fnBatches = 1000;

  static ExperimentConfig desk();
};

Dataset make_target_dataset(const ExperimentConfig& cfg, std::uint64_t seed);
Dataset make_secondary_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

/// Per-seed linear-eval accuracy of the three pretraining modes.
struct ModeComparison {
  std::vector<double> baseline, mixed, cluster;
};
ModeComparison compare_modes(const ExperimentConfig& cfg);

/// table3_analog, fig4_analog, fig5_analog, fig6. Writes CSV files and a
/// summary.txt into `outDir`; returns the summary text.
std::string run_experiment(std::string_view name, const ExperimentConfig& cfg, const std::filesystem::path& outDir);

}  // namespace homocl

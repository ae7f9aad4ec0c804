#include "homocl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include "json.hpp"
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "homocl/fnsim.hpp"

namespace homocl {

namespace fs = std::filesystem;
using json = nlohmann::json;

TrainMode parse_train_mode(std::string_view s) {
  if (s == "baseline") return TrainMode::baseline;
  if (s == "cluster_aware" || s == "cluster") return TrainMode::cluster_aware;
  if (s == "mixed_domain" || s == "mixed") return TrainMode::mixed_domain;
  throw std::invalid_argument("unknown training mode: " + std::string(s));
}

std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::baseline: return "baseline";
    case TrainMode::cluster_aware: return "cluster_aware";
    case TrainMode::mixed_domain: return "mixed_domain";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (batchSize < 2) throw std::invalid_argument("config: batchSize must be >= 2");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (mode == TrainMode::cluster_aware && k < 1) throw std::invalid_argument("config: K must be >= 1");
  if (mode == TrainMode::mixed_domain && !(fractionA > 0.0 && fractionA <= 1.0))
    throw std::invalid_argument("config: fractionA must be in (0, 1]");
  loss.validate();
  augment.validate();
  EncoderShape{3, augment.outputSize}.validate();
}

// --- JSON config -----------------------------------------------------------

namespace {

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object())
      flatten(value, name, out);
    else
      out[name] = value;
  }
}

}  // namespace

void apply_json_config(TrainConfig& cfg, std::string_view text) {
  const json root = json::parse(text);
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  std::map<std::string, json> kv;
  flatten(root, "", kv);
  for (const auto& [key, v] : kv) {
    if (key == "mode") cfg.mode = parse_train_mode(v.get<std::string>());
    else if (key == "epochs") cfg.epochs = v.get<std::size_t>();
    else if (key == "batchSize") cfg.batchSize = v.get<std::size_t>();
    else if (key == "temperature" || key == "loss.temperature") cfg.loss.temperature = v.get<double>();
    else if (key == "loss.positiveMode" || key == "loss.positive_mode") cfg.loss.positiveMode = parse_positive_mode(v.get<std::string>());
    else if (key == "loss.emptyNegativePolicy" || key == "loss.empty_negative_policy") cfg.loss.emptyNegativePolicy = parse_empty_negative_policy(v.get<std::string>());
    else if (key == "lr" || key == "adam.lr") cfg.adam.lr = v.get<double>();
    else if (key == "weightDecay" || key == "adam.weightDecay") cfg.adam.weightDecay = v.get<double>();
    else if (key == "adam.beta1") cfg.adam.beta1 = v.get<double>();
    else if (key == "adam.beta2") cfg.adam.beta2 = v.get<double>();
    else if (key == "adam.eps") cfg.adam.eps = v.get<double>();
    else if (key == "augment.cropScaleMin") cfg.augment.cropScaleMin = v.get<double>();
    else if (key == "augment.cropScaleMax") cfg.augment.cropScaleMax = v.get<double>();
    else if (key == "augment.flipProb") cfg.augment.flipProb = v.get<double>();
    else if (key == "augment.jitterProb") cfg.augment.jitterProb = v.get<double>();
    else if (key == "augment.jitterStrength") cfg.augment.jitterStrength = v.get<double>();
    else if (key == "augment.grayscaleProb") cfg.augment.grayscaleProb = v.get<double>();
    else if (key == "augment.outputSize") cfg.augment.outputSize = v.get<std::uint32_t>();
    else if (key == "K" || key == "k") cfg.k = v.get<std::size_t>();
    else if (key == "kmeansIters") cfg.kmeansIters = v.get<std::size_t>();
    else if (key == "kmeansTol") cfg.kmeansTol = v.get<double>();
    else if (key == "kmeansRestarts") cfg.kmeansRestarts = v.get<std::size_t>();
    else if (key == "reclusterEvery") cfg.reclusterEvery = v.get<std::size_t>();
    else if (key == "dataset") cfg.dataset = v.get<std::string>();
    else if (key == "secondary") cfg.secondary = v.get<std::string>();
    else if (key == "fractionA") cfg.fractionA = v.get<double>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "outDir") cfg.outDir = v.get<std::string>();
    else throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }
}

TrainConfig load_train_config(const fs::path& path, TrainConfig base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  apply_json_config(base, ss.str());
  return base;
}

std::string to_json_line(const EpochMetrics& m) {
  json j = {{"epoch", m.epoch},
            {"meanLoss", m.meanLoss},
            {"steps", m.steps},
            {"skippedAnchorCount", m.skippedAnchors},
            {"activeAnchorCount", m.activeAnchors}};
  return j.dump();
}

// --- pretraining -----------------------------------------------------------

Dataset training_set(const TrainConfig& cfg, const Dataset& target, const Dataset* secondary) {
  Dataset train = target.subset(Split::train);
  if (cfg.mode != TrainMode::mixed_domain) return train;
  if (secondary == nullptr) throw std::invalid_argument("mixed_domain mode needs a secondary dataset");
  return mix_datasets(train, secondary->subset(Split::train), cfg.fractionA, train.size(), cfg.seed);
}

namespace {

std::string cluster_diagnostics(std::span<const std::int64_t> ids) {
  std::map<std::int64_t, std::size_t> hist;
  for (auto c : ids) ++hist[c];
  std::ostringstream os;
  os << hist.size() << " distinct cluster(s) among " << ids.size() << " images {";
  bool first = true;
  for (const auto& [c, n] : hist) {
    os << (first ? "" : ", ") << c << ':' << n;
    first = false;
  }
  os << '}';
  return os.str();
}

}  // namespace

PretrainResult pretrain(const TrainConfig& cfg, const Dataset& target, const Dataset* secondary,
                        const Checkpoint* resume) {
  cfg.validate();
  const Dataset train = training_set(cfg, target, secondary);
  const std::size_t n = train.size();
  const std::size_t b = cfg.batchSize;
  if (n < b) throw std::invalid_argument("pretrain: fewer training images than one batch");
  const EncoderShape shape{train.shape.channels, cfg.augment.outputSize};
  shape.validate();

  PretrainResult out;
  out.trainImages = n;
  out.trainDistribution = train.distribution;

  const auto init = init_params(shape, cfg.seed);
  Checkpoint ck;
  std::uint32_t start = 1;
  if (resume != nullptr) {
    if (!(resume->shape == shape)) throw std::invalid_argument("pretrain: checkpoint encoder shape differs from config");
    ck = *resume;
    start = resume->epoch + 1;
  } else {
    ck = make_checkpoint(shape, init, cfg.adam);
  }

  const bool useClusters = cfg.mode == TrainMode::cluster_aware;
  std::vector<std::int64_t> imageCluster;
  auto recluster = [&](std::span<const double> params) {
    ClusterStageConfig cs{cfg.kmeansIters, cfg.kmeansTol, cfg.seed, shape.viewSize, cfg.kmeansRestarts};
    out.clusters = cluster_stage(train, params, cfg.k, cs);
    imageCluster.assign(out.clusters->clusterIds.begin(), out.clusters->clusterIds.end());
  };
  if (useClusters) recluster(init);

  if (!cfg.outDir.empty()) {
    fs::create_directories(cfg.outDir);
    if (out.clusters) save_assignment(*out.clusters, cfg.outDir / "clusters.txt");
  }
  std::ofstream metricsFile;
  if (!cfg.outDir.empty())
    metricsFile.open(cfg.outDir / "metrics.jsonl", resume != nullptr ? std::ios::app : std::ios::trunc);

  const std::size_t px = shape.view_pixels();
  const std::size_t batches = n / b;  // last partial batch dropped
  std::vector<double> views(2 * b * px);
  std::vector<std::int64_t> batchClusters(b);

  for (std::uint32_t epoch = start; epoch <= cfg.epochs; ++epoch) {
    if (useClusters && cfg.reclusterEvery > 0 && epoch > 1 && (epoch - 1) % cfg.reclusterEvery == 0)
      recluster(ck.params_f64());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = make_rng(cfg.seed, {kTagEpoch, epoch});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle, i)]);

    EpochMetrics m;
    m.epoch = epoch;
    double lossSum = 0.0;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const auto nb = static_cast<long>(b);
#pragma omp parallel for schedule(static)
      for (long j = 0; j < nb; ++j) {
        const std::size_t img = order[bi * b + static_cast<std::size_t>(j)];
        Rng rng = make_rng(cfg.seed, {kTagView, epoch, img});
        auto [v1, v2] = make_views(train.samples[img].pixels, train.shape, img, cfg.augment, rng);
        std::copy(v1.pixels.begin(), v1.pixels.end(), views.begin() + static_cast<long>(2 * j * px));
        std::copy(v2.pixels.begin(), v2.pixels.end(), views.begin() + static_cast<long>((2 * j + 1) * px));
      }
      const auto params = ck.params_f64();
      const ForwardRecord rec = forward(shape, params, views, 2 * b);

      LossResult lr;
      if (useClusters) {
        for (std::size_t j = 0; j < b; ++j) batchClusters[j] = imageCluster[order[bi * b + j]];
        const BatchIndex index = BatchIndex::with_clusters(batchClusters);
        try {
          lr = cluster_aware_ntxent(rec.projections, kProjectionWidth, index, cfg.loss);
        } catch (const DegenerateBatchError& e) {
          throw DegenerateBatchError(std::string(e.what()) + " [epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(bi) + ": " + cluster_diagnostics(batchClusters) + "]");
        }
      } else {
        lr = ntxent(rec.projections, kProjectionWidth, BatchIndex::sibling_pairs(b), cfg.loss);
      }
      if (!std::isfinite(lr.loss))
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi));
      const auto grads = backward(rec, params, lr.grad);
      adam_step<float>(ck.params, grads, ck.adam);

      lossSum += lr.loss;
      m.skippedAnchors += lr.skippedAnchors;
      m.activeAnchors += lr.activeAnchors;
      ++m.steps;
    }
    m.meanLoss = m.steps > 0 ? lossSum / static_cast<double>(m.steps) : 0.0;
    ck.epoch = epoch;
    out.metrics.push_back(m);
    if (!cfg.outDir.empty()) {
      metricsFile << to_json_line(m) << '\n' << std::flush;
      save_checkpoint(ck, cfg.outDir / "checkpoint_latest.hckp");
    }
  }
  if (!cfg.outDir.empty()) save_checkpoint(ck, cfg.outDir / "checkpoint_final.hckp");
  out.checkpoint = std::move(ck);
  return out;
}

PretrainResult pretrain(const TrainConfig& cfg) {
  if (cfg.dataset.empty()) throw std::invalid_argument("pretrain: config has no dataset path");
  const Dataset target = load_dataset(cfg.dataset);
  if (cfg.mode == TrainMode::mixed_domain) {
    if (cfg.secondary.empty()) throw std::invalid_argument("pretrain: mixed_domain needs a secondary dataset path");
    const Dataset other = load_dataset(cfg.secondary);
    return pretrain(cfg, target, &other);
  }
  return pretrain(cfg, target);
}

double linear_eval_accuracy(const Checkpoint& ckpt, const Dataset& dataset, double labelFraction,
                            const LinearConfig& cfg) {
  const FeatureTable t = extract_features(ckpt, dataset);
  const LinearHead head = train_linear(t, labelFraction, cfg);
  return evaluate(head, t, Split::test);
}

// --- K sweep ---------------------------------------------------------------

std::vector<KSweepRow> k_sweep(const TrainConfig& base, std::span<const std::size_t> kGrid,
                               std::span<const Dataset> datasets, const LinearConfig& linear) {
  if (kGrid.empty()) throw std::invalid_argument("k_sweep: empty K grid");
  std::vector<KSweepRow> rows;
  for (std::size_t k : kGrid) {
    KSweepRow row;
    row.k = k;
    for (const Dataset& d : datasets) {
      TrainConfig cfg = base;
      cfg.mode = TrainMode::cluster_aware;
      cfg.k = k;
      cfg.outDir.clear();
      try {
        const auto res = pretrain(cfg, d);
        row.accuracy.push_back(linear_eval_accuracy(res.checkpoint, d, 1.0, linear));
      } catch (const DegenerateBatchError& e) {
        row.failed = true;
        row.reason = "degenerate";
        row.accuracy.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_k_sweep_csv(std::span<const KSweepRow> rows, std::span<const std::string> names, std::ostream& os) {
  os << "K";
  for (const auto& n : names) os << ',' << n;
  os << ",status\n";
  for (const auto& r : rows) {
    os << r.k;
    for (double a : r.accuracy) {
      os << ',';
      if (std::isnan(a))
        os << "FAILED(" << r.reason << ')';
      else
        os << std::fixed << std::setprecision(2) << a << std::defaultfloat;
    }
    os << ',' << (r.failed ? "FAILED(" + r.reason + ")" : std::string("ok")) << '\n';
  }
}

// --- scripted experiments --------------------------------------------------

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.target.classCount = 5;
  c.target.imageSize = 16;
  c.target.channels = 3;
  c.target.samples = 1200;
  c.target.prototypeNoiseStd = 0.4;
  c.target.overlapShiftMax = 1;
  c.target.prototypeCells = 4;
  c.target.noiseCells = 4;
  c.target.trainFraction = 0.6;
  c.target.valFraction = 0.1;
  c.secondary = c.target;
  c.secondary.classCount = 100;
  c.train.epochs = 40;
  c.train.batchSize = 32;
  c.train.augment.outputSize = 16;
  c.train.adam.lr = 3e-3;
  c.train.k = 5;
  return c;
}

Dataset make_target_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  SynthesisSpec s = cfg.target;
  s.seed = stream_seed(seed, {0x7a});
  s.classCount = static_cast<std::uint32_t>(cfg.targetWeights.size());
  return generate_dataset(s, make_explicit_distribution(cfg.targetWeights), 0);
}

Dataset make_secondary_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  SynthesisSpec s = cfg.secondary;
  s.seed = stream_seed(seed, {0x7b});
  return generate_dataset(s, make_uniform_distribution(s.classCount), 1);
}

ModeComparison compare_modes(const ExperimentConfig& cfg) {
  ModeComparison out;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset target = make_target_dataset(cfg, seed);
    const Dataset other = make_secondary_dataset(cfg, seed);
    TrainConfig t = cfg.train;
    t.seed = seed;
    t.outDir.clear();
    LinearConfig lin = cfg.linear;
    lin.seed = seed;
    for (TrainMode mode : {TrainMode::baseline, TrainMode::mixed_domain, TrainMode::cluster_aware}) {
      t.mode = mode;
      const auto res = pretrain(t, target, &other);
      const double acc = linear_eval_accuracy(res.checkpoint, target, 1.0, lin);
      (mode == TrainMode::baseline ? out.baseline : mode == TrainMode::mixed_domain ? out.mixed : out.cluster)
          .push_back(acc);
    }
  }
  return out;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
  os << text;
}

std::string experiment_fig6(const ExperimentConfig& cfg, const fs::path& dir) {
  std::ostringstream summary;
  SweepParams p;
  p.distribution = make_uniform_distribution(100);
  p.batchSize = 128;
  p.batches = cfg.fnBatches;
  p.seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();
  struct Curve {
    SweepAxis axis;
    std::vector<double> grid;
    const char* file;
  };
  const std::vector<Curve> curves = {
      {SweepAxis::dataset_size, {1e3, 1e4, 1e5, 1e6}, "fig6_dataset_size.csv"},
      {SweepAxis::batch_size, {32, 64, 128, 256, 512}, "fig6_batch_size.csv"},
      {SweepAxis::class_count, {10, 20, 50, 100, 200, 500, 1000}, "fig6_class_count.csv"},
  };
  for (const auto& c : curves) {
    const auto rows = sweep(c.axis, c.grid, p);
    std::ostringstream csv;
    write_sweep_csv(c.axis, rows, csv);
    write_text(dir / c.file, csv.str());
    double lo = 1e300, hi = -1e300;
    for (const auto& r : rows) {
      lo = std::min(lo, r.report.meanFnPercent);
      hi = std::max(hi, r.report.meanFnPercent);
    }
    summary << to_string(c.axis) << ": FN% from " << rows.front().report.meanFnPercent << " to "
            << rows.back().report.meanFnPercent << " (spread " << hi - lo << ")\n";
  }
  return summary.str();
}

std::string experiment_table3(const ExperimentConfig& cfg, const fs::path& dir) {
  std::ostringstream csv, summary;
  csv << "row,source,analyticFnPercent,simulatedFnPercent,stdError,batchSize,accuracy\n";

  // preset statistics at the benchmark batch size
  const std::size_t bigB = 128;
  const auto msl = make_msl_like();
  const auto wide = make_uniform_distribution(1000);
  std::vector<double> mixW;
  for (double w : msl.weights()) mixW.push_back(0.5 * w);
  for (double w : wide.weights()) mixW.push_back(0.5 * w);
  const ClassDistribution mix(mixW);
  const std::vector<std::pair<std::string, ClassDistribution>> presets = {
      {"in_domain_pure", msl}, {"out_domain_pure", wide}, {"mix_50_50", mix}};
  for (std::size_t i = 0; i < presets.size(); ++i) {
    const auto& [name, dist] = presets[i];
    const auto rep = simulate_fn_rate(dist, bigB, cfg.fnBatches, stream_seed(cfg.seeds.front(), {i}));
    csv << name << ",preset," << analytic_fn_rate(dist, bigB) << ',' << rep.meanFnPercent << ',' << rep.stdError << ','
        << bigB << ",\n";
    summary << name << " (preset, B=" << bigB << "): analytic FN " << analytic_fn_rate(dist, bigB) << "%\n";
  }

  // desk-scale synthetic analogue with linear-evaluation accuracy on the target domain
  std::vector<double> accIn, accOut, accMix;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset target = make_target_dataset(cfg, seed);
    const Dataset other = make_secondary_dataset(cfg, seed);
    TrainConfig t = cfg.train;
    t.seed = seed;
    t.outDir.clear();
    LinearConfig lin = cfg.linear;
    lin.seed = seed;
    t.mode = TrainMode::baseline;
    accIn.push_back(linear_eval_accuracy(pretrain(t, target).checkpoint, target, 1.0, lin));
    accOut.push_back(linear_eval_accuracy(pretrain(t, other).checkpoint, target, 1.0, lin));
    t.mode = TrainMode::mixed_domain;
    accMix.push_back(linear_eval_accuracy(pretrain(t, target, &other).checkpoint, target, 1.0, lin));
  }
  const auto targetDist = make_explicit_distribution(cfg.targetWeights);
  const auto otherDist = make_uniform_distribution(cfg.secondary.classCount);
  std::vector<double> w;
  for (double x : targetDist.weights()) w.push_back(0.5 * x);
  for (double x : otherDist.weights()) w.push_back(0.5 * x);
  const std::vector<std::tuple<std::string, ClassDistribution, double>> desk = {
      {"in_domain_pure", targetDist, mean_of(accIn)},
      {"out_domain_pure", otherDist, mean_of(accOut)},
      {"mix_50_50", ClassDistribution(w), mean_of(accMix)}};
  const std::size_t b = cfg.train.batchSize;
  for (std::size_t i = 0; i < desk.size(); ++i) {
    const auto& [name, dist, acc] = desk[i];
    const auto rep = simulate_fn_rate(dist, b, cfg.fnBatches, stream_seed(cfg.seeds.front(), {10 + i}));
    csv << name << ",synthetic," << analytic_fn_rate(dist, b) << ',' << rep.meanFnPercent << ',' << rep.stdError
        << ',' << b << ',' << acc << '\n';
    summary << name << " (synthetic, B=" << b << "): analytic FN " << analytic_fn_rate(dist, b)
            << "%, target test accuracy " << acc << "%\n";
  }
  write_text(dir / "table3_analog.csv", csv.str());
  return summary.str();
}

std::string experiment_fig4(const ExperimentConfig& cfg, const fs::path& dir) {
  std::map<std::pair<int, double>, std::vector<double>> acc;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset target = make_target_dataset(cfg, seed);
    TrainConfig t = cfg.train;
    t.seed = seed;
    t.outDir.clear();
    LinearConfig lin = cfg.linear;
    lin.seed = seed;
    for (TrainMode mode : {TrainMode::baseline, TrainMode::cluster_aware}) {
      t.mode = mode;
      const auto res = pretrain(t, target);
      const FeatureTable table = extract_features(res.checkpoint, target);
      for (double f : cfg.labelFractions)
        acc[{static_cast<int>(mode), f}].push_back(evaluate(train_linear(table, f, lin), table, Split::test));
    }
  }
  std::ostringstream csv, summary;
  csv << "mode,labelFraction,meanAccuracy\n";
  for (const auto& [key, v] : acc) {
    const auto mode = static_cast<TrainMode>(key.first);
    csv << to_string(mode) << ',' << key.second << ',' << mean_of(v) << '\n';
    summary << to_string(mode) << " @ " << key.second * 100 << "% labels: " << mean_of(v) << "%\n";
  }
  write_text(dir / "fig4_analog.csv", csv.str());
  return summary.str();
}

std::string experiment_fig5(const ExperimentConfig& cfg, const fs::path& dir) {
  const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();
  SynthesisSpec s = cfg.target;
  std::vector<Dataset> sets;
  s.classCount = 19;
  s.seed = stream_seed(seed, {0x51});
  sets.push_back(generate_dataset(s, make_msl_like(), 0));
  s.classCount = 8;
  s.seed = stream_seed(seed, {0x52});
  sets.push_back(generate_dataset(s, make_hirise_like(), 0));
  TrainConfig t = cfg.train;
  t.seed = seed;
  LinearConfig lin = cfg.linear;
  lin.seed = seed;
  const auto rows = k_sweep(t, cfg.kGrid, sets, lin);
  const std::vector<std::string> names = {"msl_like", "hirise_like"};
  std::ostringstream csv, summary;
  write_k_sweep_csv(rows, names, csv);
  write_text(dir / "fig5_analog.csv", csv.str());
  summary << csv.str();
  return summary.str();
}

}  // namespace

std::string run_experiment(std::string_view name, const ExperimentConfig& cfg, const fs::path& outDir) {
  fs::create_directories(outDir);
  std::string summary;
  if (name == "fig6")
    summary = experiment_fig6(cfg, outDir);
  else if (name == "table3_analog")
    summary = experiment_table3(cfg, outDir);
  else if (name == "fig4_analog")
    summary = experiment_fig4(cfg, outDir);
  else if (name == "fig5_analog")
    summary = experiment_fig5(cfg, outDir);
  else
    throw std::invalid_argument("unknown experiment: " + std::string(name));
  write_text(outDir / (std::string(name) + "_summary.txt"), summary);
  return summary;
}

}  // namespace homocl

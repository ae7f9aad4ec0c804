#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "homocl/clustering.hpp"
#include "homocl/fnsim.hpp"
#include "homocl/lineval.hpp"
#include "homocl/pipeline.hpp"
#include "homocl/synthdata.hpp"
#include "json.hpp"

using namespace homocl;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Writes to a file, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c, const std::string& outHelp) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, outHelp);
  cmd->add_option("--config", c.config, "JSON config file");
}

TrainConfig train_config(const Common& c, const CLI::App* cmd) {
  TrainConfig cfg;
  if (!c.config.empty()) cfg = load_train_config(c.config, cfg);
  if (cmd->count("--seed")) cfg.seed = c.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive pretraining lab on synthetic homogeneous image data"};
  app.require_subcommand(1);

  // synth
  Common synthC;
  std::string dist = "uniform";
  SynthesisSpec spec;
  std::uint32_t domain = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_common(synth, synthC, "Dataset file to write");
  synth->add_option("--classes", spec.classCount, "Number of classes");
  synth->add_option("--dist", dist, "Class distribution")->check(CLI::IsMember({"uniform", "msl", "hirise"}));
  synth->add_option("--n", spec.samples, "Number of images");
  synth->add_option("--size", spec.imageSize, "Image side length");
  synth->add_option("--channels", spec.channels, "Channels");
  synth->add_option("--noise", spec.prototypeNoiseStd, "Gaussian noise std");
  synth->add_option("--shift", spec.overlapShiftMax, "Maximum circular shift");
  synth->add_option("--proto-cells", spec.prototypeCells, "Prototype grid side (0 = per pixel)");
  synth->add_option("--noise-cells", spec.noiseCells, "Noise grid side (0 = white noise)");
  synth->add_option("--domain", domain, "Domain id");

  // pretrain
  Common preC;
  std::string mode, dataset, secondary, resume;
  std::size_t epochs = 0, batch = 0, k = 0;
  double lr = 0.0;
  auto* pre = app.add_subcommand("pretrain", "Contrastive pretraining");
  add_common(pre, preC, "Output directory (checkpoints, metrics)");
  pre->add_option("--mode", mode, "baseline | cluster_aware | mixed_domain");
  pre->add_option("--dataset", dataset, "Target dataset");
  pre->add_option("--secondary", secondary, "Second domain for mixed_domain");
  pre->add_option("--epochs", epochs, "Epochs");
  pre->add_option("--batch-size", batch, "Images per batch");
  pre->add_option("--k", k, "Cluster count");
  pre->add_option("--lr", lr, "Learning rate");
  pre->add_option("--resume", resume, "Checkpoint to resume from");

  // cluster
  Common clC;
  std::string clData, clCkpt;
  std::size_t clK = 5, clRestarts = 10;
  std::uint32_t clView = 32;
  auto* cl = app.add_subcommand("cluster", "k-means cluster assignment of a dataset");
  add_common(cl, clC, "Assignment file to write");
  cl->add_option("--dataset", clData, "Dataset")->required();
  cl->add_option("--checkpoint", clCkpt, "Encoder checkpoint (default: seed-initialized encoder)");
  cl->add_option("--k", clK, "Cluster count");
  cl->add_option("--view-size", clView, "Encoder input size without a checkpoint");
  cl->add_option("--restarts", clRestarts, "k-means restarts");

  // fnsim
  Common fnC;
  std::string fnDist = "uniform", fnMode = "iid", fnAxis;
  std::size_t fnClasses = 10, fnB = 32, fnBatches = 1000, fnN = 0;
  std::vector<double> fnGrid;
  auto* fn = app.add_subcommand("fnsim", "False-negative pair rate simulation");
  add_common(fn, fnC, "CSV file (default stdout)");
  fn->add_option("--dist", fnDist, "uniform | msl | hirise");
  fn->add_option("--classes", fnClasses, "Classes for the uniform distribution");
  fn->add_option("--batch-size", fnB, "Images per batch");
  fn->add_option("--batches", fnBatches, "Batches to simulate");
  fn->add_option("--mode", fnMode, "iid | finite");
  fn->add_option("--dataset-size", fnN, "Finite label list size");
  fn->add_option("--sweep", fnAxis, "datasetSize | batchSize | classCount");
  fn->add_option("--grid", fnGrid, "Sweep values");

  // lineval
  Common lvC;
  std::string lvCkpt, lvData;
  std::vector<double> lvFractions{1.0};
  LinearConfig lin;
  auto* lv = app.add_subcommand("lineval", "Frozen-encoder linear evaluation");
  add_common(lv, lvC, "Output directory (features, projection, accuracies)");
  lv->add_option("--checkpoint", lvCkpt, "Encoder checkpoint")->required();
  lv->add_option("--dataset", lvData, "Dataset")->required();
  lv->add_option("--fractions", lvFractions, "Label fractions");
  lv->add_option("--epochs", lin.epochs, "Full-batch steps");
  lv->add_option("--lr", lin.lr, "Learning rate");
  lv->add_option("--hidden", lin.hiddenWidth, "Optional linear hidden width (0 = none)");

  // ksweep
  Common ksC;
  std::vector<std::string> ksData;
  std::vector<std::size_t> ksGrid{1, 2, 5, 20, 50};
  std::size_t ksEpochs = 0, ksBatch = 0;
  auto* ks = app.add_subcommand("ksweep", "Cluster-count sweep");
  add_common(ks, ksC, "CSV file (default stdout)");
  ks->add_option("--dataset", ksData, "Datasets (one accuracy column each)")->required();
  ks->add_option("--k-grid", ksGrid, "Cluster counts");
  ks->add_option("--epochs", ksEpochs, "Pretraining epochs per K");
  ks->add_option("--batch-size", ksBatch, "Images per batch");

  // experiment
  Common exC;
  std::string exName;
  std::size_t exEpochs = 0;
  std::vector<std::uint64_t> exSeeds;
  auto* ex = app.add_subcommand("experiment", "Scripted desk-scale experiments");
  add_common(ex, exC, "Output directory");
  ex->add_option("name", exName, "table3_analog | fig4_analog | fig5_analog | fig6")->required();
  ex->add_option("--epochs", exEpochs, "Override pretraining epochs");
  ex->add_option("--seeds", exSeeds, "Seeds to average over");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (!synthC.config.empty()) {
        const auto j = nlohmann::json::parse(read_file(synthC.config));
        spec.classCount = j.value("classes", spec.classCount);
        spec.samples = j.value("n", spec.samples);
        spec.imageSize = j.value("size", spec.imageSize);
        spec.channels = j.value("channels", spec.channels);
        spec.prototypeNoiseStd = j.value("noise", spec.prototypeNoiseStd);
        spec.overlapShiftMax = j.value("shift", spec.overlapShiftMax);
        spec.prototypeCells = j.value("protoCells", spec.prototypeCells);
        spec.noiseCells = j.value("noiseCells", spec.noiseCells);
        dist = j.value("dist", dist);
      }
      spec.seed = synthC.seed;
      if (synthC.out.empty()) throw std::invalid_argument("synth: --out is required");
      const auto d = make_distribution(dist, spec.classCount);
      spec.classCount = static_cast<std::uint32_t>(d.size());
      save_dataset(generate_dataset(spec, d, domain), synthC.out);
      std::cout << "wrote " << spec.samples << " images (" << d.size() << " classes) to " << synthC.out << '\n';
    } else if (*pre) {
      TrainConfig cfg = train_config(preC, pre);
      if (!mode.empty()) cfg.mode = parse_train_mode(mode);
      if (!dataset.empty()) cfg.dataset = dataset;
      if (!secondary.empty()) cfg.secondary = secondary;
      if (epochs) cfg.epochs = epochs;
      if (batch) cfg.batchSize = batch;
      if (k) cfg.k = k;
      if (lr > 0) cfg.adam.lr = lr;
      if (!preC.out.empty()) cfg.outDir = preC.out;
      PretrainResult res;
      if (!resume.empty()) {
        const Checkpoint ck = load_checkpoint(resume);
        const Dataset target = load_dataset(cfg.dataset);
        if (cfg.mode == TrainMode::mixed_domain) {
          const Dataset other = load_dataset(cfg.secondary);
          res = pretrain(cfg, target, &other, &ck);
        } else {
          res = pretrain(cfg, target, nullptr, &ck);
        }
      } else {
        res = pretrain(cfg);
      }
      for (const auto& m : res.metrics) std::cout << to_json_line(m) << '\n';
    } else if (*cl) {
      const Dataset d = load_dataset(clData);
      std::vector<double> params;
      std::uint32_t view = clView;
      if (!clCkpt.empty()) {
        const Checkpoint ck = load_checkpoint(clCkpt);
        params = ck.params_f64();
        view = ck.shape.viewSize;
      } else {
        params = init_params({d.shape.channels, view}, clC.seed);
      }
      ClusterStageConfig cs;
      cs.seed = clC.seed;
      cs.viewSize = view;
      cs.restarts = clRestarts;
      const auto a = cluster_stage(d, params, clK, cs);
      std::ostringstream os;
      write_assignment(a, os);
      emit(clC.out, os.str());
    } else if (*fn) {
      const auto d = make_distribution(fnDist, fnClasses);
      std::ostringstream os;
      if (!fnAxis.empty()) {
        if (fnGrid.empty()) throw std::invalid_argument("fnsim: --sweep needs --grid");
        SweepParams p;
        p.distribution = d;
        p.batchSize = fnB;
        p.datasetSize = fnN;
        p.batches = fnBatches;
        p.seed = fnC.seed;
        const auto axis = parse_sweep_axis(fnAxis);
        write_sweep_csv(axis, sweep(axis, fnGrid, p), os);
      } else {
        FnReport r;
        if (parse_fn_mode(fnMode) == FnMode::iid) {
          r = simulate_fn_rate(d, fnB, fnBatches, fnC.seed);
        } else {
          if (fnN == 0) throw std::invalid_argument("fnsim: finite mode needs --dataset-size");
          r = simulate_fn_rate(sample_labels(d, fnN, fnC.seed), fnB, fnBatches, fnC.seed);
        }
        os << "meanFnPercent,stdError,analyticPercent,batches,mode,batchSize,datasetSize,classCount\n"
           << r.meanFnPercent << ',' << r.stdError << ',' << analytic_fn_rate(d, fnB) << ',' << r.batchesSimulated
           << ',' << to_string(r.mode) << ',' << r.batchSize << ',' << r.datasetSize << ',' << d.size() << '\n';
      }
      emit(fnC.out, os.str());
    } else if (*lv) {
      lin.seed = lvC.seed;
      const Checkpoint ck = load_checkpoint(lvCkpt);
      const Dataset d = load_dataset(lvData);
      const FeatureTable t = extract_features(ck, d);
      std::ostringstream csv;
      csv << "labelFraction,testAccuracy\n";
      for (double f : lvFractions) csv << f << ',' << evaluate(train_linear(t, f, lin), t, Split::test) << '\n';
      if (!lvC.out.empty()) {
        const fs::path dir = lvC.out;
        fs::create_directories(dir);
        save_features(t, dir / "features.hfea");
        std::ostringstream proj;
        write_projection_csv(t, export_projection_2d(t), proj);
        emit((dir / "projection.csv").string(), proj.str());
        emit((dir / "accuracy.csv").string(), csv.str());
      }
      std::cout << csv.str();
    } else if (*ks) {
      TrainConfig cfg = train_config(ksC, ks);
      if (ksEpochs) cfg.epochs = ksEpochs;
      if (ksBatch) cfg.batchSize = ksBatch;
      std::vector<Dataset> sets;
      for (const auto& p : ksData) sets.push_back(load_dataset(p));
      LinearConfig l;
      l.seed = cfg.seed;
      const auto rows = k_sweep(cfg, ksGrid, sets, l);
      std::vector<std::string> names;
      for (const auto& p : ksData) names.push_back(fs::path(p).stem().string());
      std::ostringstream os;
      write_k_sweep_csv(rows, names, os);
      emit(ksC.out, os.str());
    } else if (*ex) {
      ExperimentConfig cfg = ExperimentConfig::desk();
      if (!exC.config.empty()) cfg.train = load_train_config(exC.config, cfg.train);
      if (exEpochs) cfg.train.epochs = exEpochs;
      if (!exSeeds.empty()) cfg.seeds = exSeeds;
      else if (ex->count("--seed")) cfg.seeds = {exC.seed};
      const fs::path dir = exC.out.empty() ? fs::path("experiments") / exName : fs::path(exC.out);
      std::cout << run_experiment(exName, cfg, dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "homocl/kernels.hpp"
#include "homocl/pipeline.hpp"
#include "test_util.hpp"

using namespace homocl;

namespace {

Dataset tiny_dataset(std::size_t n, std::uint32_t classes, std::uint64_t seed, std::uint32_t domain = 0) {
  SynthesisSpec spec;
  spec.classCount = classes;
  spec.imageSize = 8;
  spec.samples = n;
  spec.seed = seed;
  auto d = generate_dataset(spec, make_uniform_distribution(classes), domain);
  std::fill(d.splits.begin(), d.splits.end(), Split::train);
  return d;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batchSize = 4;
  cfg.augment.outputSize = 8;
  cfg.adam.lr = 1e-3;
  cfg.kmeansRestarts = 2;
  cfg.seed = 21;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("two images make one step of four views") {
  auto cfg = tiny_config();
  cfg.epochs = 1;
  cfg.batchSize = 2;
  const auto r = pretrain(cfg, tiny_dataset(2, 2, 1));
  REQUIRE(r.metrics.size() == 1);
  CHECK(r.metrics[0].steps == 1);
  CHECK(r.metrics[0].activeAnchors == 4);
  CHECK(r.checkpoint.adam.step == 1);
  CHECK(r.checkpoint.epoch == 1);
}

TEST_CASE("last partial batch is dropped") {
  auto cfg = tiny_config();
  cfg.epochs = 1;
  const auto r = pretrain(cfg, tiny_dataset(11, 2, 2));
  CHECK(r.metrics[0].steps == 2);
}

TEST_CASE("cluster-aware with one cluster reports a degenerate batch") {
  auto cfg = tiny_config();
  cfg.mode = TrainMode::cluster_aware;
  cfg.k = 1;
  CHECK_THROWS_AS(pretrain(cfg, tiny_dataset(8, 2, 3)), DegenerateBatchError);
  try {
    pretrain(cfg, tiny_dataset(8, 2, 3));
  } catch (const DegenerateBatchError& e) {
    CHECK(std::string(e.what()).find("epoch 1, batch 0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  auto cfg = tiny_config();
  cfg.batchSize = 1;
  CHECK_THROWS(cfg.validate());
  cfg = tiny_config();
  cfg.epochs = 0;
  CHECK_THROWS(cfg.validate());
  cfg = tiny_config();
  cfg.mode = TrainMode::cluster_aware;
  cfg.k = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_THROWS(pretrain(tiny_config(), tiny_dataset(3, 2, 1)));
}

TEST_CASE("single thread runs are bit identical") {
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  auto cfg = tiny_config();
  cfg.mode = TrainMode::cluster_aware;
  cfg.k = 2;
  const auto d = tiny_dataset(12, 3, 4);
  const auto a = pretrain(cfg, d), b = pretrain(cfg, d);
  CHECK(a.checkpoint == b.checkpoint);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) CHECK(to_json_line(a.metrics[i]) == to_json_line(b.metrics[i]));
  kernels::set_threads(saved);
  // and match the multi-threaded run as well
  CHECK(pretrain(cfg, d).checkpoint == a.checkpoint);
}

TEST_CASE("resume equals an uninterrupted thread run") {
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  auto cfg = tiny_config();
  cfg.epochs = 3;
  const auto d = tiny_dataset(12, 3, 5);
  const auto full = pretrain(cfg, d);
  auto part_cfg = cfg;
  part_cfg.epochs = 1;
  const auto part = pretrain(part_cfg, d);
  const auto resumed = pretrain(cfg, d, nullptr, &part.checkpoint);
  CHECK(resumed.checkpoint == full.checkpoint);
  REQUIRE(resumed.metrics.size() == 2);
  CHECK(resumed.metrics[0].epoch == 2);
  CHECK(to_json_line(resumed.metrics[1]) == to_json_line(full.metrics[2]));
  kernels::set_threads(saved);
}

TEST_CASE("output files") {
  auto cfg = tiny_config();
  cfg.mode = TrainMode::cluster_aware;
  cfg.k = 2;
  cfg.epochs = 3;
  cfg.outDir = scratch_path("run");
  std::filesystem::remove_all(cfg.outDir);
  const auto r = pretrain(cfg, tiny_dataset(8, 2, 6));
  CHECK(load_checkpoint(cfg.outDir / "checkpoint_final.hckp") == r.checkpoint);
  CHECK(load_checkpoint(cfg.outDir / "checkpoint_latest.hckp") == r.checkpoint);
  CHECK(load_assignment(cfg.outDir / "clusters.txt") == *r.clusters);
  std::ifstream is(cfg.outDir / "metrics.jsonl");
  std::string line;
  std::uint32_t expect = 1;
  while (std::getline(is, line)) {
    CHECK(line.find("\"epoch\":" + std::to_string(expect)) != std::string::npos);
    CHECK(line.find("\"skippedAnchorCount\"") != std::string::npos);
    ++expect;
  }
  CHECK(expect == 4);
}

TEST_CASE("json config overlay") {
  TrainConfig cfg;
  apply_json_config(cfg, R"({"mode":"cluster_aware","epochs":3,"batchSize":16,"K":7,
    "loss":{"temperature":0.2,"positive_mode":"cluster_extended","empty_negative_policy":"error"},
    "augment.flipProb":0.0,"adam":{"lr":0.01},"seed":9,"fractionA":0.25})");
  CHECK(cfg.mode == TrainMode::cluster_aware);
  CHECK(cfg.epochs == 3);
  CHECK(cfg.batchSize == 16);
  CHECK(cfg.k == 7);
  CHECK(cfg.loss.temperature == 0.2);
  CHECK(cfg.loss.positiveMode == PositiveMode::cluster_extended);
  CHECK(cfg.loss.emptyNegativePolicy == EmptyNegativePolicy::error);
  CHECK(cfg.augment.flipProb == 0.0);
  CHECK(cfg.adam.lr == 0.01);
  CHECK(cfg.seed == 9);
  CHECK(cfg.fractionA == 0.25);
  CHECK_THROWS(apply_json_config(cfg, R"({"unknownKey":1})"));
  CHECK_THROWS(apply_json_config(cfg, R"({"mode":"nope"})"));
  CHECK_THROWS(apply_json_config(cfg, "not json"));
}

TEST_CASE("mixed training set follows the declared distribution") {
  auto cfg = tiny_config();
  cfg.mode = TrainMode::mixed_domain;
  const auto a = tiny_dataset(40, 2, 7, 0), b = tiny_dataset(40, 4, 8, 1);
  const auto mix = training_set(cfg, a, &b);
  CHECK(mix.size() == 40);
  std::map<std::uint32_t, std::size_t> per_domain;
  for (const auto& s : mix.samples) per_domain[s.domainId]++;
  CHECK(per_domain[0] == 20);
  CHECK(per_domain[1] == 20);
  const auto& w = mix.distribution.weights();
  REQUIRE(w.size() == 6);
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.125));
  const auto r = pretrain(cfg, a, &b);
  CHECK(r.trainDistribution == mix.distribution);
  CHECK_THROWS(training_set(cfg, a, nullptr));
}

TEST_CASE("k sweep rows") {
  auto cfg = tiny_config();
  cfg.epochs = 1;
  auto d = tiny_dataset(24, 2, 9);
  for (std::size_t i = 16; i < 24; ++i) d.splits[i] = Split::test;
  const std::vector<std::size_t> grid{1, 2, 3};
  const std::vector<Dataset> sets{d};
  LinearConfig lin;
  lin.epochs = 20;
  const auto rows = k_sweep(cfg, grid, sets, lin);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].failed);
  CHECK(std::isnan(rows[0].accuracy[0]));
  CHECK_FALSE(rows[1].failed);
  CHECK(rows[2].accuracy[0] >= 0.0);
  std::ostringstream os;
  const std::vector<std::string> names{"synthetic"};
  write_k_sweep_csv(rows, names, os);
  CHECK(os.str().find("K,synthetic,status\n1,FAILED(degenerate)") == 0);
}

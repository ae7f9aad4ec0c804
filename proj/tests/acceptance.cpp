// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "homocl/fnsim.hpp"
#include "homocl/kernels.hpp"
#include "homocl/pipeline.hpp"

using namespace homocl;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

ClassDistribution random_distribution(Rng& rng) {
  const std::size_t k = 2 + uniform_index(rng, 199);
  std::vector<double> w(k);
  const double alpha = 0.2 + 2.0 * uniform01(rng);  // power of a uniform: spread of skews
  double s = 0.0;
  for (auto& x : w) s += (x = std::pow(uniform01(rng) + 1e-9, 1.0 / alpha));
  for (auto& x : w) x /= s;
  return make_explicit_distribution(w);
}

void criterion1() {
  const double ten = analytic_fn_rate(make_uniform_distribution(10), 32);
  const double thousand = analytic_fn_rate(make_uniform_distribution(1000), 32);
  report(1, std::abs(ten - 9.84) <= 0.01 && thousand < 0.1,
         fmt("uniform(10),B=32 -> %.4f%%; uniform(1000),B=32 -> %.4f%%", ten, thousand));
}

void criterion2() {
  Rng rng = make_rng(2024, {2});
  int bad = 0;
  double worst = 0.0;
  for (int d = 0; d < 20; ++d) {
    const auto dist = random_distribution(rng);
    for (std::size_t b : {32u, 128u}) {
      const auto r = simulate_fn_rate(dist, b, 1000, stream_seed(77, {static_cast<std::uint64_t>(d), b}));
      const double z = std::abs(r.meanFnPercent - analytic_fn_rate(dist, b)) / std::max(r.stdError, 1e-12);
      worst = std::max(worst, z);
      if (z > 3.0) ++bad;
    }
  }
  report(2, bad == 0, fmt("40 (distribution, B) cells, %d outside 3 SE, worst |z| = %.2f", bad, worst));
}

void criterion3() {
  SweepParams p;
  p.distribution = make_uniform_distribution(100);
  p.batches = 1000;
  p.seed = 3;
  const std::vector<double> batches{32, 64, 128, 256, 512};
  const std::vector<double> sizes{1e3, 1e4, 1e5, 1e6};
  std::vector<double> values;
  for (const auto& r : sweep(SweepAxis::batch_size, batches, p)) values.push_back(r.report.meanFnPercent);
  for (const auto& r : sweep(SweepAxis::dataset_size, sizes, p)) values.push_back(r.report.meanFnPercent);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  report(3, *hi - *lo < 1.0, fmt("FN%% range over B 32..512 and N 1e3..1e6: [%.3f, %.3f], spread %.3f", *lo, *hi, *hi - *lo));
}

void criterion4() {
  const auto msl = make_msl_like();
  const double analytic = analytic_fn_rate(msl, 128);
  std::vector<double> w;
  for (double x : msl.weights()) w.push_back(0.5 * x);
  const auto wide = make_uniform_distribution(1000);
  for (double x : wide.weights()) w.push_back(0.5 * x);
  const auto mix = make_explicit_distribution(w);
  const double mix_closed = analytic_fn_rate(mix, 128);
  const auto sim = simulate_fn_rate(mix, 128, 1000, 4);
  const bool band = std::abs(analytic - 15.0) <= 2.0;
  const bool agree = std::abs(sim.meanFnPercent - mix_closed) <= 3.0 * sim.stdError;
  report(4, band && agree,
         fmt("msl_like B=128 analytic %.2f%% (band 13..17); 50/50 mix closed form %.2f%%, simulated %.2f%% +- %.2f; "
             "published mixed value 0.30%% not reproducible with disjoint class sets",
             analytic, mix_closed, sim.meanFnPercent, sim.stdError));
}

void criterion5() {
  const std::vector<double> Z{1, 0, 1, 0, 0, 1, 0, 1};
  const double plain = ntxent(Z, 2, BatchIndex::sibling_pairs(2), LossConfig{}).loss;
  const double aware = cluster_aware_ntxent(Z, 2, BatchIndex::with_clusters(std::vector<std::int64_t>{0, 1}), LossConfig{}).loss;
  const double plain_exact = std::log(1.0 + 2.0 * std::exp(-2.0));
  const double aware_exact = std::log(2.0) - 2.0;

  Rng rng = make_rng(5);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t images = 2 + uniform_index(rng, 31), dim = 2 + uniform_index(rng, 30);
    std::vector<double> z(2 * images * dim);
    for (auto& x : z) x = standard_normal(rng);
    std::vector<std::int64_t> ids(2 * images);
    std::iota(ids.begin(), ids.end(), 100);
    std::shuffle(ids.begin(), ids.end(), rng);
    const double a = ntxent(z, dim, BatchIndex::sibling_pairs(images), LossConfig{}).loss;
    const double b = cluster_aware_ntxent(z, dim, BatchIndex::with_view_clusters(ids), LossConfig{}).loss;
    worst = std::max(worst, std::abs(a - b));
  }
  const bool ok = std::abs(plain - plain_exact) < 1e-6 && std::abs(aware - aware_exact) < 1e-6 && worst < 1e-10;
  report(5, ok,
         fmt("NT-Xent %.7f (log(1+2e^-2) = %.7f; stated 0.239478), cluster-aware %.7f (ln2-2 = %.7f), "
             "singleton max |diff| %.2e over 1000 batches",
             plain, plain_exact, aware, aware_exact, worst));
}

void criterion6() {
  // loss -> embedding
  Rng rng = make_rng(6);
  const std::size_t images = 6, dim = 16;
  std::vector<double> Z(2 * images * dim);
  for (auto& x : Z) x = standard_normal(rng);
  const auto clusters = std::vector<std::int64_t>{0, 1, 2, 0, 1, 2};
  const auto loss_at = [&](const std::vector<double>& z) {
    return cluster_aware_ntxent(z, dim, BatchIndex::with_clusters(clusters), LossConfig{}).loss;
  };
  const auto g = cluster_aware_ntxent(Z, dim, BatchIndex::with_clusters(clusters), LossConfig{}).grad;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    auto up = Z, dn = Z;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double fd = (loss_at(up) - loss_at(dn)) / 2e-6;
    worst_z = std::max(worst_z, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-4}));
  }

  // full network: loss through encoder to every parameter group
  const EncoderShape shape{3, 8};
  auto params = init_params(shape, 6);
  for (auto& p : params) p += 0.02 * (uniform01(rng) - 0.5);
  std::vector<double> views(2 * 3 * shape.view_pixels());
  for (auto& v : views) v = uniform01(rng);
  const auto net_loss = [&](const std::vector<double>& p) {
    const auto rec = forward(shape, p, views, 6);
    return ntxent(rec.projections, kProjectionWidth, BatchIndex::sibling_pairs(3), LossConfig{}).loss;
  };
  const auto rec = forward(shape, params, views, 6);
  const auto lr = ntxent(rec.projections, kProjectionWidth, BatchIndex::sibling_pairs(3), LossConfig{});
  const auto grad = backward(rec, params, lr.grad);
  std::size_t sampled = 0, bad = 0;
  double worst_p = 0.0;
  for (std::size_t t = 0; t < 256; ++t) {
    const std::size_t i = uniform_index(rng, params.size());
    auto up = params, dn = params;
    up[i] += 1e-5;
    dn[i] -= 1e-5;
    const double fd = (net_loss(up) - net_loss(dn)) / 2e-5;
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst_p = std::max(worst_p, rel);
    if (rel >= 1e-4) ++bad;
    ++sampled;
  }
  report(6, worst_z < 1e-4 && bad == 0 && sampled >= 200,
         fmt("embedding grads: %zu coords, max rel err %.2e; parameter grads: %zu coords, max rel err %.2e",
             Z.size(), worst_z, sampled, worst_p));
}

struct ModeRuns {
  std::vector<double> baseline, mixed, cluster;
  std::vector<double> cluster10;  // cluster-aware encoder, 10% labels
};

ModeRuns run_modes(const ExperimentConfig& cfg) {
  ModeRuns out;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset target = make_target_dataset(cfg, seed);
    const Dataset other = make_secondary_dataset(cfg, seed);
    TrainConfig t = cfg.train;
    t.seed = seed;
    LinearConfig lin = cfg.linear;
    lin.seed = seed;
    for (TrainMode mode : {TrainMode::baseline, TrainMode::mixed_domain, TrainMode::cluster_aware}) {
      t.mode = mode;
      const auto res = pretrain(t, target, &other);
      const double acc = linear_eval_accuracy(res.checkpoint, target, 1.0, lin);
      if (mode == TrainMode::baseline) out.baseline.push_back(acc);
      if (mode == TrainMode::mixed_domain) out.mixed.push_back(acc);
      if (mode == TrainMode::cluster_aware) {
        out.cluster.push_back(acc);
        out.cluster10.push_back(linear_eval_accuracy(res.checkpoint, target, 0.10, lin));
      }
    }
    std::printf("  seed %llu: baseline %.2f mixed %.2f cluster_aware %.2f (10%% labels %.2f)\n",
                static_cast<unsigned long long>(seed), out.baseline.back(), out.mixed.back(), out.cluster.back(),
                out.cluster10.back());
    std::fflush(stdout);
  }
  return out;
}

void criteria7and8(const ExperimentConfig& cfg) {
  const auto r = run_modes(cfg);
  const double b = mean(r.baseline), m = mean(r.mixed), c = mean(r.cluster), c10 = mean(r.cluster10);
  const bool a_ok = c >= b + 2.0;
  const bool b_ok = m >= b + 1.0 && b < m && m < c;
  report(7, a_ok && b_ok,
         fmt("mean over %zu seeds: baseline %.2f, mixed %.2f, cluster_aware(K=5) %.2f; "
             "need cluster >= baseline+2 (%s) and baseline < mixed (>= +1) < cluster (%s)",
             r.baseline.size(), b, m, c, a_ok ? "met" : "not met", b_ok ? "met" : "not met"));
  report(8, std::abs(c - c10) <= 3.0,
         fmt("cluster_aware encoder: 100%% labels %.2f, 10%% labels %.2f, gap %.2f (limit 3.0)", c, c10, std::abs(c - c10)));
}

void criterion9(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.seeds.front();
  TrainConfig t = cfg.train;
  t.seed = seed;
  LinearConfig lin = cfg.linear;
  lin.seed = seed;
  const std::vector<Dataset> sets{make_target_dataset(cfg, seed)};
  const auto rows = k_sweep(t, cfg.kGrid, sets, lin);
  std::ostringstream csv;
  const std::vector<std::string> names{"synthetic5"};
  write_k_sweep_csv(rows, names, csv);
  std::printf("%s", csv.str().c_str());

  const bool degenerate = !rows.empty() && rows.front().k == 1 && rows.front().failed;
  std::size_t best = 0;
  double best_acc = -1.0;
  bool complete = rows.size() == cfg.kGrid.size();
  for (const auto& r : rows) {
    complete = complete && r.accuracy.size() == 1;
    if (!r.failed && r.accuracy[0] > best_acc) {
      best_acc = r.accuracy[0];
      best = r.k;
    }
  }
  const std::string text = csv.str();
  complete = complete && static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == rows.size() + 1;
  const bool near = best == 2 || best == 5 || best == 20;
  report(9, degenerate && near && complete,
         fmt("K=1 degenerate: %s; argmax K=%zu (%.2f%%); csv rows %zu", degenerate ? "yes" : "no", best, best_acc,
             rows.size()));
}

template <class T, class W, class R>
bool round_trips(const T& value, W write, R read) {
  std::stringstream a;
  write(value, a);
  const std::string bytes = a.str();
  std::stringstream b(bytes);
  const T back = read(b);
  std::stringstream c;
  write(back, c);
  return back == value && c.str() == bytes;
}

void criterion10(const ExperimentConfig& cfg) {
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  ExperimentConfig small = cfg;
  small.target.samples = 160;
  TrainConfig t = small.train;
  t.epochs = 3;
  t.mode = TrainMode::cluster_aware;
  t.seed = 10;
  const Dataset d = make_target_dataset(small, 10);
  const auto a = pretrain(t, d), b = pretrain(t, d);
  bool same_metrics = a.metrics.size() == b.metrics.size();
  for (std::size_t i = 0; same_metrics && i < a.metrics.size(); ++i)
    same_metrics = to_json_line(a.metrics[i]) == to_json_line(b.metrics[i]);
  const bool same_ckpt = a.checkpoint == b.checkpoint && a.clusters == b.clusters;
  kernels::set_threads(saved);

  const bool ds = round_trips(d, write_dataset, read_dataset);
  const bool ck = round_trips(a.checkpoint, write_checkpoint, read_checkpoint);
  const bool fe = round_trips(extract_features(a.checkpoint, d), write_features, read_features);
  report(10, same_metrics && same_ckpt && ds && ck && fe,
         fmt("repeat run: checkpoint %s, metrics %s; round trip: dataset %s, checkpoint %s, features %s",
             same_ckpt ? "identical" : "DIFFERENT", same_metrics ? "identical" : "DIFFERENT", ds ? "ok" : "bad",
             ck ? "ok" : "bad", fe ? "ok" : "bad"));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto timed = [&](std::vector<int> ids, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      for (int id : ids) report(id, false, std::string("exception: ") + e.what());
    }
  };
  const auto cfg = ExperimentConfig::desk();
  timed({1}, criterion1);
  timed({2}, criterion2);
  timed({3}, criterion3);
  timed({4}, criterion4);
  timed({5}, criterion5);
  timed({6}, criterion6);
  timed({7, 8}, [&] { criteria7and8(cfg); });
  timed({9}, [&] { criterion9(cfg); });
  timed({10}, [&] { criterion10(cfg); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criterion(s) failed; %.0f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}

#include "homocl/lineval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "homocl/augment.hpp"
#include "homocl/binary_io.hpp"

namespace homocl {

std::vector<std::size_t> FeatureTable::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

void FeatureTable::validate() const {
  if (features.size() != rows * dim || labels.size() != rows || splits.size() != rows || imageIds.size() != rows)
    throw std::invalid_argument("FeatureTable: array lengths do not match the row count");
  for (float v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("FeatureTable: non-finite feature");
  for (auto l : labels)
    if (l >= classCount) throw std::invalid_argument("FeatureTable: label out of range");
}

FeatureTable extract_features(const EncoderShape& shape, std::span<const double> params, const Dataset& dataset) {
  if (shape.channels != dataset.shape.channels)
    throw std::invalid_argument("extract_features: encoder expects " + std::to_string(shape.channels) +
                                " channels, dataset has " + std::to_string(dataset.shape.channels));
  if (params.size() != ParamLayout::for_channels(shape.channels).total)
    throw std::invalid_argument("extract_features: parameter count does not match the encoder");
  const auto views = stack_center_views(dataset, shape.viewSize);
  const auto h = encode_features(shape, params, views, dataset.size());
  FeatureTable t;
  t.rows = dataset.size();
  t.dim = kFeatureWidth;
  t.features.assign(h.begin(), h.end());
  t.labels = dataset.labels();
  t.splits = dataset.splits;
  t.classCount = static_cast<std::uint32_t>(dataset.class_count());
  t.imageIds.resize(t.rows);
  for (std::size_t i = 0; i < t.rows; ++i) t.imageIds[i] = dataset.samples[i].sampleId;
  return t;
}

FeatureTable extract_features(const Checkpoint& ckpt, const Dataset& dataset) {
  return extract_features(ckpt.shape, ckpt.params_f64(), dataset);
}

void write_features(const FeatureTable& t, std::ostream& os) {
  t.validate();
  io::write_magic(os, "HFEA");
  io::write_u32(os, static_cast<std::uint32_t>(t.rows));
  io::write_u32(os, static_cast<std::uint32_t>(t.dim));
  io::write_f32_array(os, t.features);
  for (auto l : t.labels) io::write_u32(os, l);
  for (auto s : t.splits) io::write_u8(os, static_cast<std::uint8_t>(s));
  io::write_u32(os, t.classCount);
  for (auto id : t.imageIds) io::write_u64(os, id);
}

FeatureTable read_features(std::istream& is) {
  io::Reader r(is, "feature table");
  r.expect_magic("HFEA");
  FeatureTable t;
  t.rows = r.u32();
  t.dim = r.u32();
  t.features.resize(t.rows * t.dim);
  r.f32_array(t.features);
  t.labels.resize(t.rows);
  for (auto& l : t.labels) l = r.u32();
  if (r.at_end()) {
    // core layout only: everything is train, ids are row numbers
    t.splits.assign(t.rows, Split::train);
    t.classCount = t.labels.empty() ? 0 : *std::max_element(t.labels.begin(), t.labels.end()) + 1;
    t.imageIds.resize(t.rows);
    std::iota(t.imageIds.begin(), t.imageIds.end(), 0);
  } else {
    t.splits.resize(t.rows);
    for (auto& s : t.splits) {
      const auto v = r.u8();
      if (v > 2) r.fail("invalid split tag");
      s = static_cast<Split>(v);
    }
    t.classCount = r.u32();
    t.imageIds.resize(t.rows);
    for (auto& id : t.imageIds) id = r.u64();
    if (!r.at_end()) r.fail("trailing bytes");
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return t;
}

void save_features(const FeatureTable& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_features(t, os);
}

FeatureTable load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  return read_features(is);
}

std::vector<double> LinearHead::logits(std::span<const float> x) const {
  if (x.size() != inputDim) throw std::invalid_argument("LinearHead: input width mismatch");
  std::vector<double> in(inputDim);
  for (std::size_t d = 0; d < inputDim; ++d) in[d] = (x[d] - mean[d]) / scale[d];
  if (hiddenWidth > 0) {
    std::vector<double> h(hiddenWidth);
    for (std::size_t o = 0; o < hiddenWidth; ++o) {
      double s = hiddenB[o];
      for (std::size_t d = 0; d < inputDim; ++d) s += hiddenW[o * inputDim + d] * in[d];
      h[o] = s;
    }
    in.swap(h);
  }
  const std::size_t w = in.size();
  std::vector<double> out(classCount);
  for (std::size_t c = 0; c < classCount; ++c) {
    double s = bias[c];
    for (std::size_t d = 0; d < w; ++d) s += weight[c * w + d] * in[d];
    out[c] = s;
  }
  return out;
}

std::uint32_t LinearHead::predict(std::span<const float> x) const {
  const auto z = logits(x);
  return static_cast<std::uint32_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::vector<std::size_t> stratified_subsample(std::span<const std::uint32_t> labels,
                                              std::span<const std::size_t> candidates, double fraction,
                                              std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("label fraction must be in (0, 1]");
  std::uint32_t k = 0;
  for (auto i : candidates) k = std::max(k, labels[i] + 1);
  std::vector<std::vector<std::size_t>> byClass(k);
  for (auto i : candidates) byClass[labels[i]].push_back(i);
  std::vector<std::size_t> out;
  for (std::uint32_t c = 0; c < k; ++c) {
    auto& pool = byClass[c];
    if (pool.empty()) continue;
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * pool.size())));
    Rng rng = make_rng(seed, {kTagSubsample, c});
    for (std::size_t j = 0; j < want; ++j) std::swap(pool[j], pool[j + uniform_index(rng, pool.size() - j)]);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(out.begin(), out.end());
  return out;
}

LinearHead train_linear(const FeatureTable& table, double labelFraction, const LinearConfig& cfg) {
  table.validate();
  if (cfg.epochs < 1) throw std::invalid_argument("train_linear: epochs must be >= 1");
  const auto train = table.indices(Split::train);
  if (train.empty()) throw std::invalid_argument("train_linear: empty train split");
  const auto rows = stratified_subsample(table.labels, train, labelFraction, cfg.seed);

  LinearHead head;
  head.inputDim = table.dim;
  head.classCount = table.classCount;
  head.hiddenWidth = cfg.hiddenWidth;
  const std::size_t f = table.dim, k = table.classCount, n = rows.size();

  std::vector<char> present(k, 0);
  for (auto i : rows) present[table.labels[i]] = 1;
  for (std::uint32_t c = 0; c < k; ++c)
    if (!present[c]) head.missingClasses.push_back(c);
  if (!head.missingClasses.empty())
    std::cerr << "warning: " << head.missingClasses.size()
              << " class(es) absent from the labelled subsample cannot be learned\n";

  head.mean.assign(f, 0.0);
  head.scale.assign(f, 0.0);
  for (auto i : rows)
    for (std::size_t d = 0; d < f; ++d) head.mean[d] += table.features[i * f + d];
  for (auto& m : head.mean) m /= static_cast<double>(n);
  for (auto i : rows)
    for (std::size_t d = 0; d < f; ++d) {
      const double c = table.features[i * f + d] - head.mean[d];
      head.scale[d] += c * c;
    }
  for (auto& s : head.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-8)) s = 1.0;
  }
  std::vector<double> x(n * f);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t d = 0; d < f; ++d) x[r * f + d] = (table.features[rows[r] * f + d] - head.mean[d]) / head.scale[d];

  // packed parameters: [hiddenW, hiddenB,] weight, bias
  const std::size_t hw = cfg.hiddenWidth;
  const std::size_t w = hw > 0 ? hw : f;
  const std::size_t nHidden = hw > 0 ? hw * f + hw : 0;
  std::vector<double> theta(nHidden + k * w + k, 0.0);
  if (hw > 0) {
    Rng rng = make_rng(cfg.seed, {kTagLinear});
    const double a = std::sqrt(6.0 / static_cast<double>(f + hw));
    for (std::size_t i = 0; i < hw * f; ++i) theta[i] = (2.0 * uniform01(rng) - 1.0) * a;
  }
  auto state = AdamState<double>::zeros(theta.size(), {cfg.lr, cfg.weightDecay, 0.9, 0.999, 1e-8});
  std::vector<double> grad(theta.size()), hid(n * w), gh(w), p(k);
  for (std::size_t step = 0; step < cfg.epochs; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double* W1 = theta.data();
    const double* B1 = W1 + hw * f;
    const double* W2 = theta.data() + nHidden;
    const double* B2 = W2 + k * w;
    double* gW1 = grad.data();
    double* gB1 = gW1 + hw * f;
    double* gW2 = grad.data() + nHidden;
    double* gB2 = gW2 + k * w;
    for (std::size_t r = 0; r < n; ++r) {
      const double* in = &x[r * f];
      double* h = &hid[r * w];
      if (hw > 0) {
        for (std::size_t o = 0; o < hw; ++o) {
          double s = B1[o];
          for (std::size_t d = 0; d < f; ++d) s += W1[o * f + d] * in[d];
          h[o] = s;
        }
      } else {
        std::copy_n(in, f, h);
      }
      double mx = -1e300;
      for (std::size_t c = 0; c < k; ++c) {
        double s = B2[c];
        for (std::size_t d = 0; d < w; ++d) s += W2[c * w + d] * h[d];
        p[c] = s;
        mx = std::max(mx, s);
      }
      double z = 0.0;
      for (auto& v : p) z += (v = std::exp(v - mx));
      p[table.labels[rows[r]]] -= z;
      for (auto& v : p) v /= z * static_cast<double>(n);  // dCE/dlogit, averaged
      std::fill(gh.begin(), gh.end(), 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        gB2[c] += p[c];
        for (std::size_t d = 0; d < w; ++d) {
          gW2[c * w + d] += p[c] * h[d];
          gh[d] += p[c] * W2[c * w + d];
        }
      }
      if (hw > 0)
        for (std::size_t o = 0; o < hw; ++o) {
          gB1[o] += gh[o];
          for (std::size_t d = 0; d < f; ++d) gW1[o * f + d] += gh[o] * in[d];
        }
    }
    adam_step<double>(theta, grad, state);
  }
  if (hw > 0) {
    head.hiddenW.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(hw * f));
    head.hiddenB.assign(theta.begin() + static_cast<std::ptrdiff_t>(hw * f), theta.begin() + static_cast<std::ptrdiff_t>(nHidden));
  }
  head.weight.assign(theta.begin() + static_cast<std::ptrdiff_t>(nHidden), theta.begin() + static_cast<std::ptrdiff_t>(nHidden + k * w));
  head.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(nHidden + k * w), theta.end());
  return head;
}

double evaluate(const LinearHead& head, const FeatureTable& table, Split split) {
  const auto idx = table.indices(split);
  if (idx.empty()) throw std::invalid_argument("evaluate: split has no rows");
  std::size_t correct = 0;
  for (auto i : idx) correct += head.predict(table.row(i)) == table.labels[i] ? 1u : 0u;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(idx.size());
}

Projection2D export_projection_2d(const FeatureTable& table) {
  if (table.rows < 2) throw std::invalid_argument("export_projection_2d: need at least two rows");
  const std::size_t n = table.rows, f = table.dim;
  Eigen::MatrixXd x(n, f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < f; ++d) x(i, d) = table.features[i * f + d];
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("export_projection_2d: eigen decomposition failed");

  Projection2D p;
  p.coords.assign(n * 2, 0.0);
  p.variance.assign(2, 0.0);
  p.components.assign(2 * f, 0.0);
  const double top = std::max(eig.eigenvalues()(static_cast<Eigen::Index>(f) - 1), 0.0);
  for (std::size_t c = 0; c < 2 && c < f; ++c) {
    const auto col = static_cast<Eigen::Index>(f - 1 - c);  // eigenvalues ascend
    const double lambda = eig.eigenvalues()(col);
    if (!(lambda > 1e-12 * std::max(top, 1.0))) continue;  // rank deficit: leave zeros
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;  // largest-magnitude loading positive
    const Eigen::VectorXd proj = x * v;
    for (std::size_t i = 0; i < n; ++i) p.coords[i * 2 + c] = proj(static_cast<Eigen::Index>(i));
    for (std::size_t d = 0; d < f; ++d) p.components[c * f + d] = v(static_cast<Eigen::Index>(d));
    p.variance[c] = lambda;
  }
  return p;
}

void write_projection_csv(const FeatureTable& table, const Projection2D& p, std::ostream& os) {
  os << "imageId,x,y,classId\n";
  for (std::size_t i = 0; i < table.rows; ++i)
    os << table.imageIds[i] << ',' << p.coords[i * 2] << ',' << p.coords[i * 2 + 1] << ',' << table.labels[i] << '\n';
}

}  // namespace homocl

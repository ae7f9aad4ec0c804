#include "homocl/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "homocl/binary_io.hpp"

namespace homocl {

double standard_normal(Rng& rng) {
  // Box-Muller with the cosine branch only; u1 in (0,1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

ClassDistribution::ClassDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("ClassDistribution: at least one class required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("ClassDistribution: weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ClassDistribution: weights must sum to 1");
  cdf_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());
}

double ClassDistribution::collision_probability() const {
  double s = 0.0;
  for (double w : weights_) s += w * w;
  return s;
}

std::uint32_t ClassDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto c = static_cast<std::size_t>(it - cdf_.begin());
  if (c >= weights_.size()) c = weights_.size() - 1;
  return static_cast<std::uint32_t>(c);
}

ClassDistribution make_uniform_distribution(std::size_t classes) {
  if (classes == 0) throw std::invalid_argument("uniform distribution: K must be positive");
  return ClassDistribution(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

ClassDistribution make_explicit_distribution(std::vector<double> weights) { return ClassDistribution(std::move(weights)); }

ClassDistribution make_anchored_skew(std::size_t classes, double max_weight, double min_weight) {
  if (classes < 3) throw std::invalid_argument("anchored skew needs at least 3 classes");
  if (!(max_weight > min_weight && min_weight > 0.0))
    throw std::invalid_argument("anchored skew: need max > min > 0");
  const std::size_t middle = classes - 2;
  const double target = 1.0 - max_weight - min_weight;
  if (!(target > static_cast<double>(middle) * min_weight && target < static_cast<double>(middle) * max_weight))
    throw std::invalid_argument("anchored skew: anchors cannot be joined by a monotone tail summing to 1");

  // Intermediate class j (1 = rarest intermediate) weighs min_weight * r^j.
  auto tail_sum = [&](double r) {
    double s = 0.0, p = min_weight;
    for (std::size_t j = 1; j <= middle; ++j) {
      p *= r;
      s += p;
    }
    return s;
  };
  double lo = 1.0, hi = 2.0;
  while (tail_sum(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_sum(mid) < target ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);

  std::vector<double> w(classes);
  w.front() = max_weight;
  w.back() = min_weight;
  double p = min_weight;
  for (std::size_t j = 1; j <= middle; ++j) {
    p *= r;
    w[classes - 1 - j] = p;
  }
  // Push the residual rounding error onto the largest intermediate class.
  double total = 0.0;
  for (double x : w) total += x;
  w[1] += 1.0 - total;
  return ClassDistribution(std::move(w));
}

ClassDistribution make_msl_like() { return make_anchored_skew(19, 0.3476, 0.0034); }
ClassDistribution make_hirise_like() { return make_anchored_skew(8, 0.8139, 0.0068); }

ClassDistribution make_distribution(std::string_view name, std::size_t classes) {
  if (name == "uniform") return make_uniform_distribution(classes);
  if (name == "msl") return make_msl_like();
  if (name == "hirise") return make_hirise_like();
  throw std::invalid_argument("unknown distribution kind: " + std::string(name));
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

Dataset Dataset::subset(Split split) const {
  Dataset d;
  d.shape = shape;
  d.distribution = distribution;
  d.domainId = domainId;
  for (std::size_t i : indices(split)) {
    d.samples.push_back(samples[i]);
    d.splits.push_back(split);
  }
  return d;
}

std::vector<std::uint32_t> Dataset::labels() const {
  std::vector<std::uint32_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].classId;
  return out;
}

void Dataset::validate() const {
  if (splits.size() != samples.size()) throw std::invalid_argument("dataset: split tag count mismatch");
  std::unordered_set<std::uint64_t> ids;
  for (const auto& s : samples) {
    if (s.pixels.size() != shape.pixels()) throw std::invalid_argument("dataset: pixel count mismatch");
    if (s.classId >= distribution.size()) throw std::invalid_argument("dataset: classId out of range");
    for (float v : s.pixels)
      if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("dataset: pixel outside [0,1]");
    if (!ids.insert(s.sampleId).second) throw std::invalid_argument("dataset: duplicate sampleId");
  }
}

void SynthesisSpec::validate() const {
  if (classCount < 1) throw std::invalid_argument("synthesis: classCount must be >= 1");
  if (imageSize < 8) throw std::invalid_argument("synthesis: imageSize must be >= 8");
  if (channels < 1) throw std::invalid_argument("synthesis: channels must be >= 1");
  if (samples < 1) throw std::invalid_argument("synthesis: samples must be >= 1");
  if (!(prototypeNoiseStd >= 0.0 && prototypeNoiseStd <= 1.0))
    throw std::invalid_argument("synthesis: prototypeNoiseStd must be in [0,1]");
  if (prototypeCells > imageSize || noiseCells > imageSize)
    throw std::invalid_argument("synthesis: grid sizes must not exceed imageSize");
  if (!(trainFraction >= 0.0 && valFraction >= 0.0 && trainFraction + valFraction <= 1.0))
    throw std::invalid_argument("synthesis: invalid split fractions");
}

std::vector<std::vector<float>> make_prototypes(const SynthesisSpec& spec) {
  const std::size_t n = spec.imageSize, c = spec.channels;
  std::vector<std::vector<float>> protos(spec.classCount);
  std::vector<double> base(n * n * c), smooth(n * n * c);
  for (std::uint32_t k = 0; k < spec.classCount; ++k) {
    Rng rng = make_rng(spec.seed, {kTagPrototype, k});
    const std::size_t cells = spec.prototypeCells == 0 ? n : spec.prototypeCells;
    std::vector<double> grid(cells * cells * c);
    for (double& v : grid) v = uniform01(rng);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t ch = 0; ch < c; ++ch)
          base[(y * n + x) * c + ch] = grid[((y * cells / n) * cells + x * cells / n) * c + ch];
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t ch = 0; ch < c; ++ch) {
          double s = 0.0;
          for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx) {
              const std::size_t yy = (y + n + dy - 1) % n, xx = (x + n + dx - 1) % n;
              s += base[(yy * n + xx) * c + ch];
            }
          smooth[(y * n + x) * c + ch] = s / 9.0;
        }
    const auto [mn, mx] = std::minmax_element(smooth.begin(), smooth.end());
    const double lo = *mn, span = std::max(*mx - lo, 1e-12);
    auto& p = protos[k];
    p.resize(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) p[i] = static_cast<float>((smooth[i] - lo) / span);
  }
  return protos;
}

Dataset generate_dataset(const SynthesisSpec& spec, const ClassDistribution& dist, std::uint32_t domainId) {
  spec.validate();
  if (dist.size() != spec.classCount) throw std::invalid_argument("generate_dataset: distribution size != classCount");

  const auto protos = make_prototypes(spec);
  Dataset d;
  d.shape = {spec.imageSize, spec.imageSize, spec.channels};
  d.distribution = dist;
  d.domainId = domainId;
  d.samples.resize(spec.samples);
  d.splits.resize(spec.samples);

  const auto n_train = static_cast<std::size_t>(std::llround(spec.trainFraction * static_cast<double>(spec.samples)));
  const auto n_val = static_cast<std::size_t>(std::llround(spec.valFraction * static_cast<double>(spec.samples)));
  const long n = spec.imageSize, c = spec.channels, shift = spec.overlapShiftMax;
  const auto count = static_cast<long>(spec.samples);

#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    Rng rng = make_rng(spec.seed, {kTagSample, static_cast<std::uint64_t>(i)});
    ImageSample& s = d.samples[i];
    s.classId = dist.sample(rng);
    s.domainId = domainId;
    s.sampleId = static_cast<std::uint64_t>(i);
    const long dy = static_cast<long>(uniform_index(rng, 2 * shift + 1)) - shift;
    const long dx = static_cast<long>(uniform_index(rng, 2 * shift + 1)) - shift;
    const auto& p = protos[s.classId];
    s.pixels.resize(p.size());
    const long cells = spec.noiseCells;
    std::vector<double> coarse(static_cast<std::size_t>(cells * cells * c));
    if (spec.prototypeNoiseStd > 0.0)
      for (double& v : coarse) v = standard_normal(rng);
    for (long y = 0; y < n; ++y)
      for (long x = 0; x < n; ++x) {
        const long sy = ((y - dy) % n + n) % n, sx = ((x - dx) % n + n) % n;
        for (long ch = 0; ch < c; ++ch) {
          double v = p[(sy * n + sx) * c + ch];
          if (spec.prototypeNoiseStd > 0.0)
            v += spec.prototypeNoiseStd *
                 (cells > 0 ? coarse[((y * cells / n) * cells + x * cells / n) * c + ch] : standard_normal(rng));
          s.pixels[(y * n + x) * c + ch] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    const auto ui = static_cast<std::size_t>(i);
    d.splits[i] = ui < n_train ? Split::train : (ui < n_train + n_val ? Split::val : Split::test);
  }
  return d;
}

Dataset mix_datasets(const Dataset& a, const Dataset& b, double fractionA, std::size_t totalN, std::uint64_t seed) {
  if (a.samples.empty() || b.samples.empty()) throw std::invalid_argument("mix_datasets: inputs must be non-empty");
  if (!(fractionA >= 0.0 && fractionA <= 1.0)) throw std::invalid_argument("mix_datasets: fractionA must be in [0,1]");
  if (!(a.shape == b.shape)) throw std::invalid_argument("mix_datasets: image shapes differ");
  const auto n_a = static_cast<std::size_t>(std::llround(fractionA * static_cast<double>(totalN)));
  const std::size_t n_b = totalN - n_a;
  if (n_a > a.size() || n_b > b.size()) throw std::invalid_argument("mix_datasets: requested counts exceed source sizes");

  Rng rng = make_rng(seed, {kTagMix});
  auto draw = [&rng](std::size_t pool, std::size_t k) {
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, pool - i)]);
    idx.resize(k);
    return idx;
  };
  const auto pick_a = draw(a.size(), n_a);
  const auto pick_b = draw(b.size(), n_b);

  Dataset out;
  out.shape = a.shape;
  out.domainId = a.domainId;
  const auto offset = static_cast<std::uint32_t>(a.class_count());
  std::vector<double> w;
  w.reserve(a.class_count() + b.class_count());
  for (double p : a.distribution.weights()) w.push_back(fractionA * p);
  for (double p : b.distribution.weights()) w.push_back((1.0 - fractionA) * p);
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  out.distribution = ClassDistribution(std::move(w));

  out.samples.reserve(totalN);
  out.splits.reserve(totalN);
  for (std::size_t i : pick_a) {
    out.samples.push_back(a.samples[i]);
    out.splits.push_back(a.splits[i]);
  }
  for (std::size_t i : pick_b) {
    ImageSample s = b.samples[i];
    s.classId += offset;
    out.samples.push_back(std::move(s));
    out.splits.push_back(b.splits[i]);
  }
  for (std::size_t i = totalN; i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(out.samples[i - 1], out.samples[j]);
    std::swap(out.splits[i - 1], out.splits[j]);
  }
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].sampleId = i;
  return out;
}

// Layout: "HCL1", u32 N H W C K domainId, N x (u32 classId, u8 split),
// N*H*W*C f32 pixels, then an extension trailer with K f64 class weights and
// N u32 per-sample domain ids. Readers stop after the pixels if the trailer is absent.
void write_dataset(const Dataset& d, std::ostream& os) {
  io::write_magic(os, "HCL1");
  io::write_u32(os, static_cast<std::uint32_t>(d.size()));
  io::write_u32(os, d.shape.height);
  io::write_u32(os, d.shape.width);
  io::write_u32(os, d.shape.channels);
  io::write_u32(os, static_cast<std::uint32_t>(d.class_count()));
  io::write_u32(os, d.domainId);
  for (std::size_t i = 0; i < d.size(); ++i) {
    io::write_u32(os, d.samples[i].classId);
    io::write_u8(os, static_cast<std::uint8_t>(d.splits[i]));
  }
  for (const auto& s : d.samples) io::write_f32_array(os, s.pixels);
  for (double w : d.distribution.weights()) io::write_f64(os, w);
  for (const auto& s : d.samples) io::write_u32(os, s.domainId);
}

Dataset read_dataset(std::istream& is) {
  io::Reader r(is, "dataset");
  r.expect_magic("HCL1");
  const std::uint32_t n = r.u32();
  Dataset d;
  d.shape.height = r.u32();
  d.shape.width = r.u32();
  d.shape.channels = r.u32();
  const std::uint32_t k = r.u32();
  d.domainId = r.u32();
  if (k == 0) r.fail("class count is zero");
  if (d.shape.height == 0 || d.shape.width == 0 || d.shape.channels == 0) r.fail("zero image dimension");
  if (d.shape.pixels() > (std::size_t{1} << 28)) r.fail("implausible image size");

  d.samples.resize(n);
  d.splits.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    d.samples[i].classId = r.u32();
    const std::uint8_t tag = r.u8();
    if (tag > 2) r.fail("invalid split tag");
    if (d.samples[i].classId >= k) r.fail("classId exceeds class count");
    d.splits[i] = static_cast<Split>(tag);
    d.samples[i].sampleId = i;
    d.samples[i].domainId = d.domainId;
  }
  for (auto& s : d.samples) {
    s.pixels.resize(d.shape.pixels());
    r.f32_array(s.pixels);
  }
  if (r.at_end()) {
    std::vector<double> counts(k, 0.0);
    for (const auto& s : d.samples) counts[s.classId] += 1.0;
    if (n == 0) {
      d.distribution = make_uniform_distribution(k);
    } else {
      for (double& c : counts) c /= static_cast<double>(n);
      d.distribution = ClassDistribution(std::move(counts));
    }
    return d;
  }
  std::vector<double> w(k);
  for (double& x : w) x = r.f64();
  try {
    d.distribution = ClassDistribution(std::move(w));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  for (auto& s : d.samples) s.domainId = r.u32();
  if (!r.at_end()) r.fail("trailing bytes after dataset payload");
  return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_dataset(d, os);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  return read_dataset(is);
}

std::vector<float> read_ppm(const std::filesystem::path& path, ImageShape& shape) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  auto token = [&is]() {
    std::string t;
    while (t.empty()) {
      int ch = is.get();
      if (ch == EOF) throw TruncatedFileError("ppm: truncated header");
      if (ch == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      while (ch != EOF && !std::isspace(ch)) {
        t.push_back(static_cast<char>(ch));
        ch = is.get();
      }
    }
    return t;
  };
  if (token() != "P6") throw FormatError("ppm: only binary P6 is supported");
  const unsigned long w = std::stoul(token()), h = std::stoul(token()), maxval = std::stoul(token());
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw FormatError("ppm: invalid header values");
  shape = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w), 3};
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(shape.pixels() * bytes_per);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size()) throw TruncatedFileError("ppm: truncated pixel data");
  std::vector<float> out(shape.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = bytes_per == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    out[i] = static_cast<float>(static_cast<double>(v) / static_cast<double>(maxval));
  }
  return out;
}

}  // namespace homocl

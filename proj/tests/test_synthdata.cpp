#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "homocl/synthdata.hpp"
#include "test_util.hpp"

using namespace homocl;

TEST_CASE("uniform and explicit distributions") {
  const auto u = make_uniform_distribution(10);
  REQUIRE(u.size() == 10);
  for (double w : u.weights()) CHECK(w == doctest::Approx(0.1));
  const auto e = make_explicit_distribution({0.5, 0.5});
  CHECK(e.collision_probability() == doctest::Approx(0.5));
  CHECK_THROWS(make_explicit_distribution({0.5, 0.6}));
  CHECK_THROWS(make_explicit_distribution({1.2, -0.2}));
  CHECK_THROWS(make_explicit_distribution({}));
  CHECK_THROWS(make_uniform_distribution(0));
}

TEST_CASE("skewed presets keep their anchors") {
  const auto msl = make_msl_like();
  REQUIRE(msl.size() == 19);
  const auto& w = msl.weights();
  CHECK(*std::max_element(w.begin(), w.end()) == doctest::Approx(0.3476).epsilon(1e-12));
  CHECK(*std::min_element(w.begin(), w.end()) == doctest::Approx(0.0034).epsilon(1e-12));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // non-increasing from the dominant class down to the rarest
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1] + 1e-15);

  const auto hi = make_hirise_like();
  REQUIRE(hi.size() == 8);
  CHECK(hi.weights().front() == doctest::Approx(0.8139).epsilon(1e-12));
  CHECK(hi.weights().back() == doctest::Approx(0.0068).epsilon(1e-12));

  CHECK(make_distribution("msl", 0) == msl);
  CHECK(make_distribution("uniform", 4).size() == 4);
  CHECK_THROWS(make_distribution("imagenet", 4));
}

TEST_CASE("empirical collision rate matches sum of squared weights") {
  const auto d = make_msl_like();
  Rng rng = make_rng(3);
  std::size_t same = 0;
  const std::size_t trials = 1000000;
  for (std::size_t t = 0; t < trials; ++t) same += d.sample(rng) == d.sample(rng) ? 1u : 0u;
  CHECK(std::abs(static_cast<double>(same) / trials - d.collision_probability()) < 0.005);
}

TEST_CASE("generated class frequencies pass a chi-square goodness-of-fit test") {
  SynthesisSpec s;
  s.imageSize = 8;
  s.channels = 1;
  s.samples = 20000;
  s.classCount = 19;
  s.seed = 11;
  const auto dist = make_msl_like();
  const auto d = generate_dataset(s, dist, 0);
  std::vector<double> counts(19, 0.0);
  for (const auto& x : d.samples) counts[x.classId] += 1.0;
  double chi2 = 0.0;
  for (std::size_t c = 0; c < 19; ++c) {
    const double expected = dist[c] * s.samples;
    chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
  }
  const boost::math::chi_squared_distribution<double> ref(18.0);
  CHECK(boost::math::cdf(boost::math::complement(ref, chi2)) > 0.001);
}

TEST_CASE("uniform(5) counts stay within five binomial sigmas") {
  SynthesisSpec s;
  s.imageSize = 8;
  s.channels = 1;
  s.samples = 5000;
  s.classCount = 5;
  s.seed = 5;
  const auto d = generate_dataset(s, make_uniform_distribution(5), 0);
  std::vector<int> counts(5, 0);
  for (const auto& x : d.samples) ++counts[x.classId];
  const double sigma = std::sqrt(5000 * 0.2 * 0.8);
  for (int c : counts) CHECK(std::abs(c - 1000.0) < 5 * sigma);
}

TEST_CASE("generation invariants and determinism") {
  SynthesisSpec s;
  s.imageSize = 12;
  s.samples = 300;
  s.seed = 9;
  s.prototypeNoiseStd = 0.5;
  const auto dist = make_uniform_distribution(5);
  const auto a = generate_dataset(s, dist, 2);
  const auto b = generate_dataset(s, dist, 2);
  CHECK(a == b);
  CHECK_NOTHROW(a.validate());
  std::set<std::uint64_t> ids;
  for (const auto& x : a.samples) {
    ids.insert(x.sampleId);
    CHECK(x.domainId == 2);
    CHECK(x.classId < 5);
    for (float v : x.pixels) REQUIRE((v >= 0.0f && v <= 1.0f));
  }
  CHECK(ids.size() == a.size());
  CHECK(a.indices(Split::train).size() == 210);
  CHECK(a.indices(Split::val).size() == 30);
  CHECK(a.indices(Split::test).size() == 60);

  s.seed = 10;
  CHECK_FALSE(generate_dataset(s, dist, 2) == a);
}

TEST_CASE("single class without noise gives identical images") {
  SynthesisSpec s;
  s.classCount = 1;
  s.samples = 4;
  s.prototypeNoiseStd = 0.0;
  s.overlapShiftMax = 0;
  const auto d = generate_dataset(s, make_uniform_distribution(1), 0);
  for (const auto& x : d.samples) {
    CHECK(x.classId == 0);
    CHECK(x.pixels == d.samples[0].pixels);
  }
}

TEST_CASE("coarse prototypes and correlated noise are piecewise constant") {
  SynthesisSpec s;
  s.classCount = 2;
  s.imageSize = 8;
  s.channels = 1;
  s.samples = 2;
  s.prototypeCells = 2;
  s.noiseCells = 2;
  s.prototypeNoiseStd = 0.0;
  s.overlapShiftMax = 0;
  const auto protos = make_prototypes(s);
  // 3x3 smoothing only mixes cells near the borders; cell interiors stay flat
  CHECK(protos[0][1 * 8 + 1] == protos[0][2 * 8 + 2]);
  CHECK_THROWS(generate_dataset({.classCount = 2, .imageSize = 8, .prototypeCells = 9}, make_uniform_distribution(2), 0));
}

TEST_CASE("mixing disjoint domains") {
  SynthesisSpec s;
  s.imageSize = 8;
  s.channels = 1;
  s.samples = 200;
  s.classCount = 19;
  s.seed = 1;
  const auto a = generate_dataset(s, make_uniform_distribution(19), 0);
  s.classCount = 1000;
  s.samples = 300;
  s.seed = 2;
  const auto b = generate_dataset(s, make_uniform_distribution(1000), 1);

  const auto m = mix_datasets(a, b, 0.5, 200, 7);
  CHECK(m.size() == 200);
  CHECK(m.class_count() == 1019);
  CHECK(m.distribution.collision_probability() == doctest::Approx(0.25 * (1.0 / 19 + 1.0 / 1000)).epsilon(1e-9));
  CHECK(m.distribution.collision_probability() == doctest::Approx(0.013408).epsilon(1e-4));
  std::set<std::uint64_t> ids;
  std::size_t fromA = 0;
  for (const auto& x : m.samples) {
    ids.insert(x.sampleId);
    fromA += x.classId < 19 ? 1u : 0u;
    CHECK((x.classId < 19) == (x.domainId == 0));
  }
  CHECK(ids.size() == 200);
  CHECK(fromA == 100);
  CHECK_NOTHROW(m.validate());

  // fractionA = 1 keeps a's images only, as a permutation
  const auto only = mix_datasets(a, b, 1.0, a.size(), 3);
  std::multiset<std::vector<float>> pa, pm;
  for (const auto& x : a.samples) pa.insert(x.pixels);
  for (const auto& x : only.samples) pm.insert(x.pixels);
  CHECK(pa == pm);

  CHECK_THROWS(mix_datasets(a, b, 0.5, 1000, 1));
}

TEST_CASE("dataset files round-trip and reject corruption") {
  SynthesisSpec s;
  s.imageSize = 8;
  s.samples = 20;
  s.seed = 4;
  const auto d = generate_dataset(s, make_explicit_distribution({0.1, 0.2, 0.3, 0.2, 0.2}), 3);
  const auto path = scratch_path("roundtrip.hcl");
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);

  std::stringstream ss;
  write_dataset(d, ss);
  const std::string bytes = ss.str();

  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream badMagic(bad);
  CHECK_THROWS_AS(read_dataset(badMagic), FormatError);

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_dataset(truncated), TruncatedFileError);

  std::istringstream trailing(bytes + "junk");
  CHECK_THROWS_AS(read_dataset(trailing), FormatError);

  // core layout without the extension trailer still loads
  const std::size_t core = 4 + 6 * 4 + d.size() * 5 + d.size() * d.shape.pixels() * 4;
  std::istringstream coreOnly(bytes.substr(0, core));
  const auto c = read_dataset(coreOnly);
  CHECK(c.samples.size() == d.samples.size());
  CHECK(c.samples[3].pixels == d.samples[3].pixels);
  CHECK(c.class_count() == 5);
}

TEST_CASE("PPM import") {
  const auto path = scratch_path("tiny.ppm");
  {
    std::ofstream os(path, std::ios::binary);
    os << "P6\n# comment\n2 1\n255\n";
    const unsigned char px[6] = {0, 128, 255, 255, 0, 0};
    os.write(reinterpret_cast<const char*>(px), 6);
  }
  ImageShape shape;
  const auto img = read_ppm(path, shape);
  CHECK(shape.width == 2);
  CHECK(shape.height == 1);
  CHECK(shape.channels == 3);
  CHECK(img[1] == doctest::Approx(128.0 / 255.0));
  CHECK(img[3] == doctest::Approx(1.0));
}

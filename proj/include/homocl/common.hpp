#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace homocl {

/// Malformed binary or text file (bad magic, inconsistent sizes).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File ended before the declared payload was read.
class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Every anchor of a cluster-aware batch lost its negatives.
class DegenerateBatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during optimization.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// backward() called with a record produced under different parameters.
class StaleRecordError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a root seed and a key path, so
/// that per-sample / per-batch generators do not depend on visit order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  return Rng(stream_seed(seed, keys));
}

/// Uniform double in [0, 1) with 53 random bits; stable across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection; stable across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Standard normal draw (Box-Muller, one value per call).
double standard_normal(Rng& rng);

// Stream tags for stream_seed key paths.
enum StreamTag : std::uint64_t {
  kTagPrototype = 1,
  kTagSample = 2,
  kTagMix = 3,
  kTagInit = 4,
  kTagEpoch = 5,
  kTagView = 6,
  kTagKMeans = 7,
  kTagFnBatch = 8,
  kTagSubsample = 9,
  kTagLinear = 10,
  kTagLabels = 11,
};

}  // namespace homocl

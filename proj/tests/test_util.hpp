#pragma once

#include <filesystem>
#include <string>

#include "homocl/common.hpp"

inline std::filesystem::path scratch_path(const std::string& name) {
  const std::filesystem::path dir = HOMOCL_TEST_TMP;
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Random Gaussian matrix for tests.
inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  homocl::Rng rng = homocl::make_rng(seed, {0xfeed});
  std::vector<double> v(n);
  for (auto& x : v) x = homocl::standard_normal(rng);
  return v;
}

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mrftid/manifold.hpp"

namespace support {

// Ground truth of the simulated attitude example.
inline constexpr double kTp = 0.1;
inline constexpr double kTd = 1.0 / 1.42;
inline constexpr double kTau = 0.06;
inline constexpr double kGain = 0.14 * 1.42;

inline mrftid::Plant attitude_example() {
  return mrftid::soiptd<double>({kGain, kTp, kTd, kTau});
}

// Full default-grid manifold, generated once and kept in the build tree.
inline mrftid::Manifold cached_manifold(double beta) {
  namespace fs = std::filesystem;
  const fs::path dir = MRFTID_CACHE_DIR;
  fs::create_directories(dir);
  char name[64];
  std::snprintf(name, sizeof name, "ufm_beta%+.2f.json", beta);
  const fs::path path = dir / name;
  if (fs::exists(path)) {
    try {
      return mrftid::load_manifold(path.string());
    } catch (const mrftid::Error&) {
      fs::remove(path);
    }
  }
  mrftid::Manifold man = mrftid::generate_ufm(beta);
  const fs::path tmp = path.string() + ".tmp";
  mrftid::save_manifold(man, tmp.string());
  fs::rename(tmp, path);
  return man;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace support

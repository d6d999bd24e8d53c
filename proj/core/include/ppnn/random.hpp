#pragma once

#include <cstdint>
#include <random>

namespace ppnn {

using Rng = std::mt19937_64;

// Independent stream for task `index` under `master`. The stream seed is
// master XOR index, expanded through std::seed_seq so that neighbouring
// indices do not produce correlated engine states.
Rng substream(std::uint64_t master, std::uint64_t index);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

// Poisson draw; zero for non-positive means.
std::uint64_t poisson(Rng& rng, double mean);

}  // namespace ppnn

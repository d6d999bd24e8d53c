#include "ppnn/random.hpp"

namespace ppnn {

Rng substream(std::uint64_t master, std::uint64_t index) {
  const std::uint64_t key = master ^ index;
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::poisson_distribution<long long>(mean)(rng));
}

}  // namespace ppnn

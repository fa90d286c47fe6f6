#pragma once

#include <cstdint>
#include <random>

namespace ldtail {

/// Independent normal stream identified by (seed, stream index). Parallel
/// Monte Carlo derives one stream per chunk of samples, so results do not
/// depend on how chunks are assigned to workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x6c647461u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ldtail

#pragma once

#include <cstdint>
#include <random>

#include "grace/normal.hpp"

namespace grace {

/// One step of the splitmix64 sequence; advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purpose tags for independent random streams.
enum class Stream : std::uint64_t {
  design = 1,
  noise = 2,
  perturbation = 3,
  folds = 4,
};

/// Hashes a master seed with a replicate index, a purpose tag and an
/// optional extra key into a seed for an independent stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                 Stream tag, std::uint64_t extra = 0) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t word : {replicate, static_cast<std::uint64_t>(tag), extra}) {
    state = h ^ word;
    h = splitmix64(state);
  }
  return h;
}

/// Seeded generator whose output sequence is fixed by the C++ standard
/// (mt19937_64) and whose transforms are implemented here, so draws are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw by inversion.
  double normal() { return normal_quantile(uniform()); }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace grace

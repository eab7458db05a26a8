#ifndef QSPECTRA_RNG_HPP
#define QSPECTRA_RNG_HPP

#include <cmath>
#include <cstdint>

#include "qspectra/types.hpp"

namespace qspectra {

// Deterministic generator with a platform-independent output sequence.
// splitmix64 state advance; Gaussians via Box-Muller so results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe to feed to log().
  double uniform_pos() { return 1.0 - uniform(); }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform_pos();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * M_PI * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Complex cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Counter-based split: the generator for trial `stream` of master `seed`
/// is independent of scheduling and of all other streams.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng mix(seed ^ (0x632be59bd9b4e019ULL * (stream + 1)));
  return mix.next_u64();
}

inline Rng rng_for(std::uint64_t seed, std::uint64_t stream) {
  return Rng(split_seed(seed, stream));
}

}  // namespace qspectra

#endif

#ifndef NFPOS_RNG_HPP
#define NFPOS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace nfpos {

// SplitMix64 generator (Steele, Lea, Flood 2014). Chosen over std::mt19937
// because the full output sequence is specified by the 64-bit seed alone and
// is trivially reproducible in any language; std::normal_distribution is
// implementation-defined, so Gaussians come from an explicit Box-Muller
// transform of the uniform stream.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit mantissa.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // One standard normal draw via Box-Muller; draws are produced in pairs and
  // the spare is cached so consecutive calls consume the uniform stream in a
  // fixed, documented order.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    // u1 == 0 would blow up the log; remap to the smallest representable draw.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Both Box-Muller outputs at once; used for complex Gaussian noise where
  // the pair maps to (real, imag).
  void next_gaussian_pair(double& g0, double& g1) {
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    g0 = r * std::cos(theta);
    g1 = r * std::sin(theta);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Disjoint sub-streams from one seed: mixes the tag through one SplitMix64
// step so e.g. position and noise streams of a sample never overlap.
inline uint64_t derive_stream_seed(uint64_t seed, uint64_t tag) {
  SplitMix64 mixer(seed ^ (tag * 0xD1B54A32D192ED03ULL));
  return mixer.next_u64();
}

namespace stream_tag {
inline constexpr uint64_t kPosition = 1;
inline constexpr uint64_t kNoise = 2;
inline constexpr uint64_t kShuffle = 3;
inline constexpr uint64_t kInit = 4;
}  // namespace stream_tag

}  // namespace nfpos

#endif

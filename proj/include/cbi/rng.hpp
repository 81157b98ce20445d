#pragma once

#include <cmath>
#include <cstdint>

namespace cbi {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 output function (Steele/Lea/Flood). Full-avalanche, invertible.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based random stream keyed by (seed, path, step, source).
//
// The key is absorbed into a 64-bit state through repeated splitmix64
// finalization; successive outputs walk the splitmix64 sequence from there.
// Streams with distinct keys are statistically independent, so paths, steps
// and noise sources can be simulated in any order or in parallel while
// reproducing bit-identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t source) {
    using detail::kGolden;
    using detail::mix64;
    std::uint64_t s = mix64(seed + kGolden);
    s = mix64(s ^ (path + 0xD1B54A32D192ED03ULL));
    s = mix64(s ^ (step + 0x8CB92BA72F3D8DD7ULL));
    s = mix64(s ^ (source + 0xDB4F0B9175AE2165ULL));
    state_ = s;
  }

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  // Uniform in the open interval (0,1); never returns 0 or 1, safe under log().
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Poisson(mean). Knuth's product method on chunks of mean <= 30 keeps the
  // uniform-product above the double underflow threshold and stays exact for
  // arbitrary means (a Poisson sum of independent Poisson chunks).
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_knuth(30.0);
      mean -= 30.0;
    }
    if (mean > 0.0) total += poisson_knuth(mean);
    return total;
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cbi

#ifndef NERM_RNG_HPP
#define NERM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace nerm {

namespace detail {
// Stafford mix13 finalizer (the SplitMix64 output function).
inline std::uint64_t mix13(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic combination of a seed with a salt; used to derive
// sub-seeds without correlating the resulting streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return detail::mix13(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

// Counter-based splittable random stream. The k-th draw is a pure function
// of (seed, stream_id, k): identical (seed, stream_id) pairs replay the
// same sequence, distinct stream ids never share state, and draws are
// identical across platforms. Not cryptographic.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(detail::mix13(seed + 0x9e3779b97f4a7c15ULL) ^
             detail::mix13(stream_id + 0xbf58476d1ce4e5b9ULL)),
        counter_(0) {}

  std::uint64_t next_u64() {
    return detail::mix13(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1}, unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; consumes two draws.
  double next_gaussian() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace nerm

#endif

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace splogsum {

// splitmix64 step; also used to derive independent child seeds from a base
// seed plus counters, so adding a new consumer never shifts another stream.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = base;
  std::uint64_t a = splitmix64_next(s);
  s ^= stream * 0x9e3779b97f4a7c15ULL;
  std::uint64_t b = splitmix64_next(s);
  s ^= index * 0xd1b54a32d192ed03ULL;
  std::uint64_t c = splitmix64_next(s);
  return a ^ (b << 1) ^ c;
}

// Self-contained generator with hand-rolled uniform/normal transforms so that
// results are bit-identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // keep log(u1) finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  // Uniform integer in [0, k) by rejection (k > 0).
  std::uint64_t uniform_index(std::uint64_t k) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % k;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream tags for derive_seed; fixed constants keep draws reproducible.
namespace streams {
inline constexpr std::uint64_t kDesignMatrix = 1;
inline constexpr std::uint64_t kLinearNoise = 2;
inline constexpr std::uint64_t kLabelDraw = 3;
inline constexpr std::uint64_t kLabelFlip = 4;
inline constexpr std::uint64_t kSplit = 5;
inline constexpr std::uint64_t kCvFolds = 6;
inline constexpr std::uint64_t kReplication = 7;
}  // namespace streams

}  // namespace splogsum

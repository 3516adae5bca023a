#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ispcav {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64(s);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic random stream identified by a seed and a path of substream
/// labels. Two streams built from the same (seed, path) produce the same
/// draws. The generator is xoshiro256** keyed through splitmix64.
///
/// Parallel consumers take disjoint substreams: `rng.substream(k)` for work
/// item k, which is what makes results independent of worker count.
class RngStream {
public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : seed_(seed), key_(detail::mix64(seed)) { reset(); }

  RngStream substream(std::uint64_t label) const {
    RngStream child = *this;
    child.path_.push_back(label);
    // Non-commutative chaining so (a, b) and (b, a) land on different keys.
    child.key_ = detail::mix64(key_ * 0xd1342543de82ef95ULL + detail::mix64(label ^ 0x5851f42d4c957f2dULL));
    child.reset();
    return child;
  }

  template <typename... Labels>
  RngStream substream(std::uint64_t first, Labels... rest) const {
    if constexpr (sizeof...(rest) == 0) {
      return substream(first);
    } else {
      return substream(first).substream(static_cast<std::uint64_t>(rest)...);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }
  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, n) (Lemire's multiply-and-reject). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  double exponential() noexcept { return -std::log1p(-uniform()); }

private:
  void reset() noexcept {
    std::uint64_t sm = key_;
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace ispcav

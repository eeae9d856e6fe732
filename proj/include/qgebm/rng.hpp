#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Threefry-2x64, 20 rounds (Salmon et al., SC'11). Counter-based: every
// random value is a pure function of (key, counter), which is what lets a
// shifted noise path reproduce increments by re-indexing alone.

namespace qgebm::rng {

namespace detail {

inline constexpr std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

inline constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};

}  // namespace detail

inline std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> ctr,
                                                 std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
  const std::uint64_t ks[3] = {key[0], key[1], kParity ^ key[0] ^ key[1]};
  std::uint64_t x0 = ctr[0] + ks[0];
  std::uint64_t x1 = ctr[1] + ks[1];
  for (int round = 0; round < 20; ++round) {
    x0 += x1;
    x1 = detail::rotl(x1, detail::kRot[round % 8]);
    x1 ^= x0;
    if ((round + 1) % 4 == 0) {
      const int s = (round + 1) / 4;  // subkey injection 1..5
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
    }
  }
  return {x0, x1};
}

// two standard normals from one Threefry evaluation (Box-Muller pair)
inline std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr0,
                                           std::uint64_t ctr1) {
  const auto r = threefry2x64({ctr0, ctr1}, {seed, stream});
  const double u1 = (static_cast<double>(r[0] >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(r[1] >> 11) * 0x1.0p-53;          // [0,1)
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * 3.14159265358979323846 * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr0, std::uint64_t ctr1) {
  return gaussian_pair(seed, stream, ctr0, ctr1)[0];
}

inline constexpr std::uint64_t kStreamIncrements = 1;
inline constexpr std::uint64_t kStreamOuInit = 2;

}  // namespace qgebm::rng

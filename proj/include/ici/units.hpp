#pragma once

#include <cstdint>

namespace ici {

// Virtual time in picoseconds. A 4 KB frame at 100 Gbps (327.68 ns) and the
// 25 ns link delay are both exact integers at this resolution.
using SimTime = std::int64_t;

inline constexpr SimTime kPicosecond = 1;
inline constexpr SimTime kNanosecond = 1000;
inline constexpr SimTime kMicrosecond = 1000 * kNanosecond;
inline constexpr SimTime kMillisecond = 1000 * kMicrosecond;

using BitsPerSecond = std::int64_t;

inline constexpr BitsPerSecond kGbps = 1'000'000'000;

// Time to clock `bytes` onto a link of `rate` bits/s, rounded up to 1 ps.
constexpr SimTime serialization_time(std::uint64_t bytes, BitsPerSecond rate) {
  const unsigned __int128 num = static_cast<unsigned __int128>(bytes) * 8u * 1'000'000'000'000ull;
  const auto den = static_cast<unsigned __int128>(rate);
  return static_cast<SimTime>((num + den - 1) / den);
}

// Same, for a fractional rate (DCQCN pacing).
inline SimTime serialization_time(std::uint64_t bytes, double rate_bps) {
  const double ps = static_cast<double>(bytes) * 8.0 * 1e12 / rate_bps;
  return static_cast<SimTime>(ps + 0.999999);
}

constexpr double to_ns(SimTime t) { return static_cast<double>(t) / kNanosecond; }
constexpr double to_us(SimTime t) { return static_cast<double>(t) / kMicrosecond; }

}  // namespace ici

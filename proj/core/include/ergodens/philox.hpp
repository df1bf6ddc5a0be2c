#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace ergodens {

/// Counter-based generator (Philox4x32-10). A draw is a pure function of
/// (key, counter), so replicates and parallel workers never share stream
/// state: give each consumer its own counter coordinates and the outputs are
/// reproducible regardless of evaluation order.
class Philox4x32 {
public:
  explicit Philox4x32(std::uint64_t key)
      : k0_(static_cast<std::uint32_t>(key)),
        k1_(static_cast<std::uint32_t>(key >> 32)) {}

  /// One 128-bit block keyed by (ctr, lane, stream).
  std::array<std::uint32_t, 4> block(std::uint64_t ctr, std::uint32_t lane,
                                     std::uint32_t stream) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(ctr);
    std::uint32_t c1 = static_cast<std::uint32_t>(ctr >> 32);
    std::uint32_t c2 = lane;
    std::uint32_t c3 = stream;
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kBumpA;
      k1 += kBumpB;
    }
    return {c0, c1, c2, c3};
  }

  /// Uniform in (0,1), 53-bit resolution, never exactly 0 or 1.
  static double u01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Two standard normals from one block (Box-Muller).
  std::array<double, 2> normal_pair(std::uint64_t ctr, std::uint32_t lane,
                                    std::uint32_t stream) const {
    const auto b = block(ctr, lane, stream);
    const double u = u01(b[0], b[1]);
    const double v = u01(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u));
    const double ang = 2.0 * std::numbers::pi * v;
    return {r * std::cos(ang), r * std::sin(ang)};
  }

  /// Fill `out` with standard normals for step `ctr` of stream `stream`.
  void normals(std::uint64_t ctr, std::uint32_t stream,
               std::span<double> out) const {
    std::size_t i = 0;
    std::uint32_t lane = 0;
    while (i < out.size()) {
      const auto pair = normal_pair(ctr, lane++, stream);
      out[i++] = pair[0];
      if (i < out.size()) out[i++] = pair[1];
    }
  }

  double uniform(std::uint64_t ctr, std::uint32_t lane,
                 std::uint32_t stream) const {
    const auto b = block(ctr, lane, stream);
    return u01(b[0], b[1]);
  }

private:
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kBumpA = 0x9E3779B9u;
  static constexpr std::uint32_t kBumpB = 0xBB67AE85u;

  std::uint32_t k0_;
  std::uint32_t k1_;
};

/// splitmix64 finalizer; used to derive independent sub-seeds from one
/// global seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Sub-seed for replicate `rep` of experiment row `row` under `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t row,
                                 std::uint64_t rep) {
  return mix64(base ^ mix64(row * 0x100000001B3ull + rep + 1));
}

}  // namespace ergodens

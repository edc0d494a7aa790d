#pragma once

#include <cstdint>
#include <random>

namespace exm {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// What a derived stream is used for. The numeric value is part of the
/// seeding scheme, so existing values must never be renumbered.
enum class StreamPurpose : std::uint64_t {
  Sequence = 1,   // directing measure + observations of one replicate
  Posterior = 2,  // posterior draws at one (replicate, n) cell
  Anchors = 3,    // prior draws used as level-2 hat-function centers
  Oracle = 4,     // random instances for oracle checks
  Test = 5,
};

/// Counter-based stream derivation:
///   seed = splitmix64(splitmix64(splitmix64(root ^ purpose) ^ a) ^ b)
/// Replicate r at sample size n uses (a, b) = (r, n). Every draw in the
/// harness comes from a stream keyed this way, so output does not depend
/// on worker count or scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(root ^ static_cast<std::uint64_t>(purpose));
  s = splitmix64(s ^ a);
  return splitmix64(s ^ b);
}

inline Engine make_engine(std::uint64_t root, StreamPurpose purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
  return Engine(derive_seed(root, purpose, a, b));
}

/// Uniform in (0, 1), never returning the endpoints.
inline double open_uniform(Engine& eng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(eng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

}  // namespace exm

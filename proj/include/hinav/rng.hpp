#pragma once

#include <cstdint>

#include "hinav/types.hpp"

namespace hinav {

/// Noise channels for the counter-based generator. Each (seed, step,
/// channel, lane) tuple maps to an independent draw, so the stream is
/// reproducible regardless of evaluation order.
enum class Channel : std::uint32_t {
  Gyro = 1,
  Accel = 2,
  Landmark = 3,
  Timer = 4,
  LandmarkField = 5,
};

/// Stateless counter-based random generator (splitmix-style mixing).
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t step, Channel ch, std::uint32_t lane) const;

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::uint64_t step, Channel ch, std::uint32_t lane,
                           std::int64_t lo, std::int64_t hi) const;

  /// Standard normal via Box-Muller.
  double normal(std::uint64_t step, Channel ch, std::uint32_t lane) const;

  /// Three independent standard normals.
  Vec3 normal3(std::uint64_t step, Channel ch, std::uint32_t lane) const;

private:
  std::uint64_t word(std::uint64_t step, std::uint32_t channel,
                     std::uint32_t lane, std::uint32_t draw) const;

  std::uint64_t seed_;
};

/// Sample from N(0, cov); cov must be symmetric PSD.
Vec3 gaussian3(const CounterRng& rng, const Mat3& cov, std::uint64_t step,
               Channel ch, std::uint32_t lane);

} // namespace hinav

#include "hinav/rng.hpp"

#include <cmath>

namespace hinav {
namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

std::uint64_t CounterRng::word(std::uint64_t step, std::uint32_t channel,
                               std::uint32_t lane, std::uint32_t draw) const {
  std::uint64_t h = mix64(seed_);
  h = mix64(h ^ step);
  h = mix64(h ^ ((std::uint64_t(channel) << 40) |
                 (std::uint64_t(lane) << 8) | std::uint64_t(draw)));
  return h;
}

double CounterRng::uniform(std::uint64_t step, Channel ch,
                           std::uint32_t lane) const {
  const std::uint64_t w = word(step, static_cast<std::uint32_t>(ch), lane, 0);
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

std::int64_t CounterRng::uniform_int(std::uint64_t step, Channel ch,
                                     std::uint32_t lane, std::int64_t lo,
                                     std::int64_t hi) const {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t w = word(step, static_cast<std::uint32_t>(ch), lane, 0);
  return lo + static_cast<std::int64_t>(w % span);
}

double CounterRng::normal(std::uint64_t step, Channel ch,
                          std::uint32_t lane) const {
  const std::uint32_t c = static_cast<std::uint32_t>(ch);
  // (0,1] on the first draw keeps log() finite.
  const double u1 =
      (static_cast<double>(word(step, c, lane, 1) >> 11) + 1.0) * 0x1.0p-53;
  const double u2 =
      static_cast<double>(word(step, c, lane, 2) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vec3 CounterRng::normal3(std::uint64_t step, Channel ch,
                         std::uint32_t lane) const {
  return Vec3(normal(step, ch, 4 * lane), normal(step, ch, 4 * lane + 1),
              normal(step, ch, 4 * lane + 2));
}

Vec3 gaussian3(const CounterRng& rng, const Mat3& cov, std::uint64_t step,
               Channel ch, std::uint32_t lane) {
  Eigen::LLT<Mat3> llt(cov);
  Mat3 L;
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
  } else {
    // PSD but singular: fall back to an eigenvalue square root.
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    L = es.eigenvectors() *
        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  return L * rng.normal3(step, ch, lane);
}

} // namespace hinav

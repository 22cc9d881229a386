#include "herdsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace herdsim {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Steele, Lea, Flood 2014)
inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t stream,
                               std::uint64_t counter) const {
  const std::uint64_t stream_key = mix(seed_ + kGolden * (stream + 1));
  return mix(stream_key + kGolden * (counter + 1));
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream,
                          std::uint64_t draw_index) const {
  const double u1 = uniform(stream, 2 * draw_index);      // in [0,1)
  const double u2 = uniform(stream, 2 * draw_index + 1);  // in [0,1)
  const double r = std::sqrt(-2.0 * std::log1p(-u1));     // log(1-u1), 1-u1 in (0,1]
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

void CounterRng::normals(std::uint64_t stream, std::uint64_t base,
                         std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = normal(stream, base + i);
}

namespace streams {
std::uint64_t particle(std::uint64_t purpose, std::uint64_t index) {
  // purposes occupy the low bits; particle indexes are < 2^48 in practice
  return (index << 8) | (purpose & 0xFF);
}
}  // namespace streams

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix(mix(seed + kGolden) ^ (tag * kGolden + 1));
}

}  // namespace herdsim

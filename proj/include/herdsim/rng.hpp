#pragma once

#include <cstdint>
#include <span>

namespace herdsim {

/// Counter-based random streams: every draw is a pure function of
/// (seed, stream, counter), so replaying a stream is bit-identical no matter
/// how work is scheduled across threads.
///
/// The generator is nested splitmix64: the stream key is the splitmix output
/// of the master seed at position `stream`, and draw k of that stream is the
/// splitmix output of the stream key at position k.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Raw 64-bit draw, uniform over all bit patterns.
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;

  /// Uniform double in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const;

  /// Standard normal via Box-Muller; consumes counters 2k and 2k+1 of the
  /// stream for draw index k.
  double normal(std::uint64_t stream, std::uint64_t draw_index) const;

  /// Fill `out` with independent standard normals, draw indices
  /// base, base+1, ...
  void normals(std::uint64_t stream, std::uint64_t base,
               std::span<double> out) const;

 private:
  std::uint64_t seed_;
};

/// Stream ids partition the seed space by purpose so that e.g. initial-data
/// draws never collide with Brownian increments.
namespace streams {
constexpr std::uint64_t kNoise = 0;      // Brownian increments, per particle
constexpr std::uint64_t kInit = 1;       // initial positions, per particle
constexpr std::uint64_t kScratch = 2;    // everything else
std::uint64_t particle(std::uint64_t purpose, std::uint64_t index);
}  // namespace streams

/// Derive an unrelated 64-bit seed from (seed, tag); used for replica seeds
/// and for keying sub-experiments off one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace herdsim

#pragma once

#include <cstdint>
#include <random>

namespace coulomb {

// All randomness flows through 64-bit Mersenne Twister engines. Each purpose
// gets its own engine derived from (seed, stream) with SplitMix64, so extra
// draws for one purpose never shift the draws of another.
using Rng = std::mt19937_64;

enum class Stream : std::uint64_t {
  Data = 1,
  GeneratorInit = 2,
  DiscriminatorInit = 3,
  Latent = 4,
  BallNoise = 5,
  Eval = 6,
  Simulation = 7,
  Reference = 8,
};

std::uint64_t splitmix64(std::uint64_t x);
Rng make_rng(std::uint64_t seed, Stream stream);
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace coulomb

#pragma once
#include <cstdint>
#include <random>
#include <string_view>

#include "freeconvex/types.hpp"

namespace freeconvex {

using Rng = std::mt19937_64;

// Independent stream derived from a base seed and a stream name.
Rng substream(std::uint64_t seed, std::string_view name);

// Entries uniform on [-1,1]^2 in the complex plane.
Matrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Matrix random_unitary(Eigen::Index n, Rng& rng);
double uniform(Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace freeconvex

#pragma once

#include <cstdint>

namespace rydline {

std::uint64_t splitmix64(std::uint64_t x);

// Seed of realization `realization` at sweep point `point`; distinct
// (point, realization) pairs give distinct seeds for a fixed master.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t realization);

}  // namespace rydline

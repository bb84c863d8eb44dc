#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace embspec {

/// All randomness in the toolkit comes from std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. Distributions are implemented here
/// rather than taken from <random>, since the standard distributions are
/// allowed to differ between library implementations.
using Engine = std::mt19937_64;

/// FNV-1a, 64-bit. Stable across hosts and releases.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// SplitMix64 finalizer, used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double unit_interval(Engine& engine);

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound);

/// Fisher-Yates permutation of 0..n-1 driven by Engine(seed).
/// perm[i] is the source row placed at position i.
std::vector<std::size_t> fisher_yates(std::size_t n, std::uint64_t seed);

}  // namespace embspec

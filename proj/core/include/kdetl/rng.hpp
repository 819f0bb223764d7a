#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kdetl {

/// Root of every random stream in the library.
///
/// Seeds are split rather than advanced: `derive` maps (seed, tag) to an
/// independent child seed, so sub-tasks (a fold plan, a source sample, one
/// CI query) get their own stream and results never depend on evaluation
/// order or worker count.
struct Seed {
    std::uint64_t value = 0;

    Seed derive(std::uint64_t stream) const noexcept;
    Seed derive(std::string_view tag) const noexcept;
    Seed derive(std::string_view tag, std::uint64_t stream) const noexcept;

    friend bool operator==(Seed, Seed) = default;
};

using Rng = std::mt19937_64;

inline Rng make_rng(Seed seed) { return Rng(seed.value); }

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

}  // namespace kdetl

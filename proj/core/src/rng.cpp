#include "kdetl/rng.hpp"

namespace kdetl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h) noexcept {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Seed Seed::derive(std::uint64_t stream) const noexcept {
    return Seed{splitmix64(value ^ splitmix64(stream + 0x632be59bd9b4e019ULL))};
}

Seed Seed::derive(std::string_view tag) const noexcept { return derive(fnv1a(tag)); }

Seed Seed::derive(std::string_view tag, std::uint64_t stream) const noexcept {
    return derive(tag).derive(stream);
}

}  // namespace kdetl

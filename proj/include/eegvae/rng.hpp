#ifndef EEGVAE_RNG_HPP
#define EEGVAE_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace eegvae {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a purpose tag so
// that e.g. dropout draws never perturb the epsilon stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull ^ base;
    for (char c : tag) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

inline Rng make_rng(std::uint64_t base, std::string_view tag) {
    return Rng(derive_seed(base, tag));
}

} // namespace eegvae

#endif // EEGVAE_RNG_HPP

#pragma once

// Seeded, counter-free random streams. Every stream is derived from a 64-bit
// master seed plus a label and up to three integer indices, so any component
// of a simulation can be re-drawn (or skipped) without shifting the draws of
// any other component. All outputs are platform-independent: no std::
// distributions are used anywhere.

#include <cstdint>
#include <string_view>

namespace spp {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(detail::splitmix64(seed)) {}

    static RngStream keyed(std::uint64_t seed, std::string_view label,
                           std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t h = detail::splitmix64(seed ^ detail::fnv1a(label));
        h = detail::splitmix64(h ^ a);
        h = detail::splitmix64(h ^ b);
        h = detail::splitmix64(h ^ c);
        return RngStream(h);
    }

    RngStream fork(std::uint64_t a, std::uint64_t b = 0) const {
        std::uint64_t h = detail::splitmix64(state_ ^ a);
        h = detail::splitmix64(h ^ b);
        return RngStream(h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). n == 0 is a caller bug; returns 0.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        // 128-bit multiply trick; the modulo bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace spp

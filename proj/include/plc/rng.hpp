#pragma once

#include <cstdint>
#include <vector>

namespace plc {

/// Deterministic generator used for every random choice the user makes
/// (messages, permutation, signs). splitmix64 keeps the byte stream
/// identical across platforms, which the golden tests rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t limit = ~0ULL - ~0ULL % bound;
        std::uint64_t v;
        do v = next();
        while (v >= limit);
        return v % bound;
    }

    bool coin() { return (next() & 1) != 0; }

    /// Fisher-Yates permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    /// Decorrelated stream for substream i of the given seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
        return r.next();
    }

private:
    std::uint64_t state_;
};

} // namespace plc

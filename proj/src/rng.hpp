#pragma once

#include <cmath>
#include <cstdint>

namespace rcpp {

// Purpose tags that keep unrelated random draws on disjoint streams.
enum class Stream : std::uint64_t {
    kCompressX = 1,
    kCompressY = 2,
    kFeatures = 3,
    kNoise = 4,
    kTruth = 5,
    kGraph = 6,
    kMixingR = 7,
    kMixingC = 8,
    kCertify = 9,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator keyed by (seed, iteration, agent, stream).
// Draw i of a given key is a pure function of (key, i), so results do not
// depend on evaluation order or on how work is split across threads.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t agent,
               Stream stream) {
        key_ = detail::mix64(seed + 0x9e3779b97f4a7c15ULL);
        key_ = detail::mix64(key_ ^ (iteration + 0x9e3779b97f4a7c15ULL));
        key_ = detail::mix64(key_ ^ (agent + 0x9e3779b97f4a7c15ULL));
        key_ = detail::mix64(key_ ^ (static_cast<std::uint64_t>(stream) +
                                     0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t next_u64() {
        return detail::mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform on [0, 1).
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on {0, 1, ..., bound-1} by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Standard normal via Box-Muller; consumes two uniforms per draw.
    double next_gaussian() {
        const double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double v = next_uniform();
        return std::sqrt(-2.0 * std::log(u)) *
               std::cos(2.0 * 3.14159265358979323846 * v);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace rcpp

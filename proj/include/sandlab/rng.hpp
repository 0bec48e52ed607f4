#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sandlab {

// splitmix64, used to derive independent per-sample seeds from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(x);
}

// Seeded stream with hand-rolled transforms. std::* distributions are
// implementation-defined sequences; these are pinned so identical seeds give
// identical paths on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double unit() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1], safe for log()
    double unit_pos() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // uniform integer in [0, n), n >= 1, by rejection
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    long pick(long lo, long hi) {  // uniform in [lo, hi]
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double exponential(double rate) { return -std::log(unit_pos()) / rate; }

    // Knuth product method; exact for any mean via additivity on chunks.
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 30.0) {
            total += poisson_small(30.0);
            mean -= 30.0;
        }
        return total + poisson_small(mean);
    }

private:
    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = unit();
        while (prod > limit) {
            ++k;
            prod *= unit();
        }
        return k;
    }

    std::mt19937_64 eng_;
};

// FNV-1a over bytes; used for scenario hashes and memo fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace sandlab

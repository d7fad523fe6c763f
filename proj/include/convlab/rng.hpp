#pragma once

#include <cstdint>

namespace convlab {

/// Identifier recorded in every stochastic report so results can be
/// regenerated from the report alone.
inline constexpr const char* prng_id = "splitmix64/v1";

/// splitmix64 (Steele, Lea, Flood 2014). Small, fast, and trivially
/// splittable: child streams are derived by mixing the master seed with a
/// stream index, so replicates are independent and order-free.
class split_mix64 {
public:
    explicit split_mix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, bound) by rejection; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

    bool chance(std::uint64_t num, std::uint64_t den) {
        // true with probability num/den, exactly (den must fit 64 bits)
        return below(den) < num;
    }

private:
    std::uint64_t state_;
};

/// Derives the seed for an independent child stream. Mixing the indices
/// through the splitmix64 output function keeps streams decorrelated even
/// for adjacent indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    split_mix64 g(master ^ (a * 0xd1342543de82ef95ULL) ^ (b * 0xaf251af3b0f025b5ULL));
    g.next();
    return g.next();
}

} // namespace convlab

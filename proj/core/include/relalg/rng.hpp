#ifndef RELALG_RNG_HPP
#define RELALG_RNG_HPP

#include <relalg/rational.hpp>

#include <cstdint>
#include <vector>

namespace relalg {

// Deterministic PRNG (splitmix64). std::mt19937 plus the standard
// distributions would not give byte-identical streams across platforms,
// and reports must be reproducible from the seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [lo, hi], inclusive.
    long uniform(long lo, long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(next() % span);
    }

    // Non-zero rational with small numerator/denominator; used for generic
    // probe points and random frame changes.
    Rat rational(long max_num = 12, long max_den = 7) {
        long num = 0;
        while (num == 0) num = uniform(-max_num, max_num);
        long den = uniform(1, max_den);
        return rat(num, den);
    }

    // Rational that may be zero.
    Rat rational_or_zero(long max_num = 9, long max_den = 5) {
        return rat(uniform(-max_num, max_num), uniform(1, max_den));
    }

    // Derives an independent stream; used to decouple probe sequences from
    // the caller's draw order.
    Rng fork() { return Rng(next()); }

private:
    std::uint64_t state_;
};

} // namespace relalg

#endif

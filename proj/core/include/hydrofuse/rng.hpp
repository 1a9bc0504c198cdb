#pragma once

#include <cstdint>
#include <random>

namespace hydrofuse {

// Sequences produced here are identical on every platform: the engine is
// std::mt19937_64 (fully specified by the standard) and the distributions are
// implemented locally rather than taken from <random>, whose algorithms are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer on [0, n) by rejection sampling; n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stateless standard normal draw keyed by (seed, a, b, c); used where every
/// pixel needs its own reproducible noise regardless of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace hydrofuse

#pragma once

#include <cstdint>
#include <random>

namespace qkd {

/// Seedable, splittable random stream. Every stochastic operation in the
/// library takes one of these explicitly; there is no ambient randomness.
///
/// One "draw" is one call to the underlying 64-bit engine. bit(), uniform(),
/// bernoulli() and below() each consume exactly one draw.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return next(); }

    std::uint64_t next();
    bool bit();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    bool bernoulli(double p);
    /// Uniform in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n);
    std::uint32_t poisson(double mean);

    /// Independent child stream; the parent is not advanced.
    RandomStream split(std::uint64_t stream_id) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qkd

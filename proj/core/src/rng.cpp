#include "qkd/rng.hpp"

namespace qkd {

__extension__ using uint128 = unsigned __int128;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t RandomStream::next() { return engine_(); }

bool RandomStream::bit() { return (next() >> 63) != 0; }

double RandomStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool RandomStream::bernoulli(double p) { return uniform() < p; }

std::uint64_t RandomStream::below(std::uint64_t n) {
    // Multiply-shift: bias is at most n / 2^64.
    return static_cast<std::uint64_t>((static_cast<uint128>(next()) * n) >> 64);
}

std::uint32_t RandomStream::poisson(double mean) {
    std::poisson_distribution<std::uint32_t> dist(mean);
    return dist(engine_);
}

RandomStream RandomStream::split(std::uint64_t stream_id) const {
    return RandomStream(splitmix64(seed_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL)));
}

}  // namespace qkd

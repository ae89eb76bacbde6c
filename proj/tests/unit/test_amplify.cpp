#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkd/amplify.hpp"
#include "qkd/errors.hpp"

using namespace qkd;

namespace {

PaParams params_for(std::size_t p, std::size_t out_len, RandomStream& rng) {
    return {static_cast<std::uint32_t>(out_len), kDefaultSecurityParam, random_bits(rng, toeplitz_seed_length(p, out_len))};
}

Bits xor_bits(const Bits& a, const Bits& b) {
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

}  // namespace

TEST(Toeplitz, HandExample) {
    Bits key{1, 0, 1, 1}, seed{1, 0, 1, 1, 0};
    EXPECT_EQ(oracle::toeplitz_multiply(key, seed, 2), (Bits{0, 1}));
    EXPECT_EQ(privacy_amplify(key, {2, 32, seed}), (Bits{0, 1}));
}

TEST(Toeplitz, MatchesBruteForce) {
    RandomStream rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t p = 1 + rng.below(64);
        const std::size_t out = rng.below(33);
        Bits key = random_bits(rng, p);
        auto params = params_for(p, out, rng);
        ASSERT_EQ(privacy_amplify(key, params), oracle::toeplitz_multiply(key, params.toeplitz_seed, out))
            << "p=" << p << " out=" << out;
    }
}

TEST(Toeplitz, MatchesBruteForceOnLongKeys) {
    RandomStream rng(7);
    for (int i = 0; i < 50; ++i) {
        const std::size_t p = 64 + rng.below(2000);
        const std::size_t out = 1 + rng.below(p);
        Bits key = random_bits(rng, p);
        auto params = params_for(p, out, rng);
        ASSERT_EQ(privacy_amplify(key, params), oracle::toeplitz_multiply(key, params.toeplitz_seed, out));
    }
}

TEST(Toeplitz, ZeroKeyGivesZeroOutput) {
    RandomStream rng(3);
    auto params = params_for(40, 20, rng);
    EXPECT_EQ(privacy_amplify(Bits(40, 0), params), Bits(20, 0));
}

TEST(Toeplitz, Linearity) {
    RandomStream rng(4);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t p = 1 + rng.below(300);
        const std::size_t out = rng.below(p + 1);
        Bits k1 = random_bits(rng, p), k2 = random_bits(rng, p);
        auto params = params_for(p, out, rng);
        ASSERT_EQ(privacy_amplify(xor_bits(k1, k2), params),
                  xor_bits(privacy_amplify(k1, params), privacy_amplify(k2, params)));
    }
}

TEST(Toeplitz, OutputBitsAreUniformOverSeeds) {
    RandomStream rng(5);
    Bits key = random_bits(rng, 48);
    key[0] = 1;
    const std::size_t out = 16;
    const int trials = 10000;
    std::vector<int> ones(out, 0);
    for (int i = 0; i < trials; ++i) {
        auto r = privacy_amplify(key, params_for(key.size(), out, rng));
        for (std::size_t j = 0; j < out; ++j) ones[j] += r[j];
    }
    for (std::size_t j = 0; j < out; ++j) EXPECT_NEAR(ones[j] / double(trials), 0.5, oracle::three_sigma(0.5, trials) * 1.2);
}

TEST(Toeplitz, EmptyOutput) {
    EXPECT_TRUE(privacy_amplify(Bits(10, 1), {0, 32, {}}).empty());
    EXPECT_EQ(toeplitz_seed_length(10, 0), 0u);
    EXPECT_EQ(toeplitz_seed_length(10, 3), 12u);
}

TEST(Toeplitz, WrongSeedLength) {
    EXPECT_THROW((void)privacy_amplify(Bits(10, 1), {3, 32, Bits(11, 0)}), ParameterError);
}

TEST(OutputLength, Clamped) {
    EXPECT_EQ(pa_output_length(1000, 200, 100, 32), 668u);
    EXPECT_EQ(pa_output_length(100, 200, 0, 32), 0u);
}

TEST(EveBound, Examples) {
    EXPECT_EQ(estimate_eve_knowledge(0.0, SourceConfig{}, 5000), 0u);
    EXPECT_EQ(estimate_eve_knowledge(0.25, SourceConfig{}, 5000), 5000u);
    EXPECT_EQ(beam_split_bound(SourceConfig{}, 5000), 0u);
    EXPECT_EQ(estimate_eve_knowledge(0.01, SourceConfig{}, 1000), 80u);
    EXPECT_EQ(pa_output_length(5000, 0, estimate_eve_knowledge(0.25, SourceConfig{}, 5000), 32), 0u);
}

TEST(EveBound, PoissonMultiPhotonFraction) {
    const double mu = 0.5;
    const double p1 = 1.0 - oracle::poisson_pmf(0, mu);
    const double p2 = p1 - oracle::poisson_pmf(1, mu);
    EXPECT_EQ(beam_split_bound({SourceKind::Poisson, mu}, 10000), static_cast<std::size_t>(std::ceil(10000 * p2 / p1)));
}

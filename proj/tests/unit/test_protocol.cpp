#include <gtest/gtest.h>

#include <algorithm>
#include <thread>

#include "oracles.hpp"
#include "qkd/errors.hpp"
#include "qkd/session.hpp"

using namespace qkd;

namespace {

constexpr Basis R = Basis::Rectilinear;
constexpr Basis D = Basis::Diagonal;

SessionConfig clean(ProtocolId id, std::uint32_t n, std::uint64_t seed) {
    SessionConfig c;
    c.protocol = id;
    c.n_pulses = n;
    c.seed = seed;
    return c;
}

std::size_t arrivals(const PartyOutcome& receiver) {
    return std::count(receiver.received_mask.begin(), receiver.received_mask.end(), 1);
}

}  // namespace

TEST(Sift, KeepsMatchingBases) {
    std::vector<Basis> a{R, D, R, D}, b{R, R, R, D};
    Bits mask{1, 1, 1, 1}, bits{1, 0, 0, 1};
    auto s = sift(a, b, mask, bits);
    EXPECT_EQ(s.kept_indices, (std::vector<std::uint32_t>{0, 2, 3}));
    EXPECT_EQ(s.sifted_key, (Bits{1, 0, 1}));
}

TEST(Sift, NothingArrived) {
    std::vector<Basis> a{R, D, R, D};
    auto s = sift(a, a, Bits{0, 0, 0, 0}, Bits{1, 1, 1, 1});
    EXPECT_TRUE(s.kept_indices.empty());
}

TEST(Sift, ArrivalFilter) {
    std::vector<Basis> a{D, D, R, R};
    auto s = sift(a, a, Bits{1, 0, 1, 0}, Bits{0, 1, 1, 0});
    EXPECT_EQ(s.kept_indices, (std::vector<std::uint32_t>{0, 2}));
}

TEST(Sift, LengthMismatchIsProtocolError) {
    std::vector<Basis> a{R, D}, b{R};
    EXPECT_THROW((void)sift(a, b, Bits{1, 1}, Bits{0, 0}), ProtocolError);
}

TEST(EstimateQber, Examples) {
    Bits a(100, 0), b(100, 0);
    std::vector<std::uint32_t> all(100);
    for (std::uint32_t i = 0; i < 100; ++i) all[i] = i;
    EXPECT_EQ(estimate_qber(a, b, all).qber, 0.0);

    Bits c(100, 1);
    std::vector<std::uint32_t> ten(all.begin(), all.begin() + 10);
    EXPECT_EQ(estimate_qber(a, c, ten).qber, 1.0);

    for (int i = 0; i < 100; i += 4) b[i] = 1;
    auto r = estimate_qber(a, b, all);
    EXPECT_EQ(r.mismatches, 25u);
    EXPECT_DOUBLE_EQ(r.qber, 0.25);
    EXPECT_EQ(r.disclosed_bits, a);
}

TEST(EstimateQber, OutOfRangeIsProtocolError) {
    Bits a(4, 0);
    std::vector<std::uint32_t> bad{4};
    EXPECT_THROW((void)estimate_qber(a, a, bad), ProtocolError);
}

TEST(ChooseSample, SortedDistinctAndSized) {
    RandomStream rng(1);
    auto s = choose_sample(1000, 0.25, rng);
    EXPECT_EQ(s.size(), 250u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    EXPECT_LT(s.back(), 1000u);
}

TEST(Config, Validation) {
    SessionConfig c;
    EXPECT_NO_THROW(validate(c));
    c.sample_fraction = 1.0;
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.n_pulses = 20;  // leaves too few key bits
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.protocol = ProtocolId::E91;
    c.source = {SourceKind::Poisson, 0.5};
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.channel.loss_probability = 1.5;
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(Session, CleanBb84Agrees) {
    auto c = clean(ProtocolId::BB84, 10'000, 1);
    c.qber_abort_threshold = 0.05;
    auto s = run_session(c);
    ASSERT_TRUE(s.completed());
    EXPECT_EQ(s.receiver.qber.qber, 0.0);
    EXPECT_EQ(s.sender.sift.sifted_key, s.receiver.sift.sifted_key);
    EXPECT_EQ(s.sender.sift.kept_indices, s.receiver.sift.kept_indices);
    EXPECT_TRUE(s.keys_match());
    EXPECT_GT(s.sender.final_key.length(), 0u);
}

TEST(Session, Bb84SiftRatio) {
    auto s = run_session(clean(ProtocolId::BB84, 100'000, 2));
    EXPECT_NEAR(s.receiver.sift.kept_indices.size() / double(arrivals(s.receiver)), 0.5, 0.01);
}

TEST(Session, FullInterceptAborts) {
    auto c = clean(ProtocolId::BB84, 100'000, 7);
    c.eve = {EveKind::InterceptResend, 1.0, BasisPolicy::RandomBasis};
    auto s = run_session(c);
    EXPECT_EQ(s.receiver.status, SessionStatus::Aborted);
    EXPECT_EQ(s.sender.status, SessionStatus::Aborted);
    EXPECT_EQ(s.receiver.abort_reason, AbortReason::QberExceeded);
    EXPECT_NEAR(s.receiver.qber.qber, 0.25, 0.01);
    EXPECT_TRUE(s.sender.final_key.bits.empty());
}

TEST(Session, B92ConclusiveFractionAndAgreement) {
    const auto tree = oracle::b92_tree();
    ASSERT_NEAR(tree.conclusive, 0.25, 1e-12);
    ASSERT_NEAR(tree.correct_given_conclusive, 1.0, 1e-12);
    auto s = run_session(clean(ProtocolId::B92, 100'000, 3));
    ASSERT_TRUE(s.completed());
    EXPECT_NEAR(s.receiver.sift.kept_indices.size() / 100'000.0, tree.conclusive, 0.01);
    EXPECT_EQ(s.sender.sift.sifted_key, s.receiver.sift.sifted_key);
    EXPECT_TRUE(s.keys_match());
}

TEST(Session, B92NeverDisclosesBases) {
    auto s = run_session(clean(ProtocolId::B92, 5'000, 3));
    for (const auto& e : s.receiver.transcript) EXPECT_FALSE(std::holds_alternative<BasisReveal>(e.message));
}

TEST(Session, B92MatchingBasisIsInconclusive) {
    auto s = run_session(clean(ProtocolId::B92, 5'000, 4));
    for (auto i : s.receiver.sift.kept_indices) {
        // Sender bit 0 is sent rectilinear; a rectilinear measurement of it can never be conclusive.
        if (s.sender.raw_bits[i] == 0) ASSERT_EQ(s.receiver.bases[i], D);
        else ASSERT_EQ(s.receiver.bases[i], R);
    }
}

TEST(Session, E91CorrelationAndSiftRatio) {
    auto s = run_session(clean(ProtocolId::E91, 100'000, 5));
    ASSERT_TRUE(s.completed());
    ASSERT_GE(s.sender.sift.sifted_key.size(), 10'000u);
    EXPECT_EQ(hamming_distance(s.sender.sift.sifted_key, s.receiver.sift.sifted_key), 0u);
    EXPECT_NEAR(s.receiver.sift.kept_indices.size() / 100'000.0, 0.5, 0.01);
    EXPECT_TRUE(s.keys_match());
}

TEST(Session, E91InterceptOnReceiverWing) {
    auto c = clean(ProtocolId::E91, 100'000, 6);
    c.eve = {EveKind::InterceptResend, 1.0, BasisPolicy::RandomBasis};
    c.qber_abort_threshold = 1.0;
    auto s = run_session(c);
    EXPECT_NEAR(s.sifted_error_rate(), oracle::intercept_resend_qber(1.0), 0.01);
    EXPECT_NEAR(s.receiver.qber.qber, 0.25, 0.01);
}

TEST(Session, CleanChannelAllProtocolsManySeeds) {
    for (auto id : {ProtocolId::BB84, ProtocolId::B92, ProtocolId::E91})
        for (std::uint64_t seed = 100; seed < 120; ++seed) {
            auto s = run_session(clean(id, 2'000, seed));
            ASSERT_TRUE(s.completed()) << to_string(id) << " seed " << seed;
            ASSERT_EQ(s.receiver.qber.qber, 0.0);
            ASSERT_TRUE(s.keys_match());
        }
}

TEST(Session, DisclosedPositionsNeverReachTheKey) {
    for (auto id : {ProtocolId::BB84, ProtocolId::B92, ProtocolId::E91}) {
        auto s = run_session(clean(id, 8'000, 9));
        ASSERT_TRUE(s.completed());
        std::vector<std::uint32_t> disclosed;
        for (auto i : s.receiver.qber.sample_indices) disclosed.push_back(s.receiver.sift.kept_indices[i]);
        for (const auto* party : {&s.sender, &s.receiver}) {
            std::vector<std::uint32_t> overlap;
            std::set_intersection(disclosed.begin(), disclosed.end(), party->key_indices.begin(),
                                  party->key_indices.end(), std::back_inserter(overlap));
            EXPECT_TRUE(overlap.empty());
            EXPECT_EQ(party->key_indices.size() + disclosed.size(), party->sift.kept_indices.size());
        }
    }
}

TEST(Session, AbortIffQberAboveThreshold) {
    for (double f : {0.0, 0.2, 0.4, 0.6}) {
        for (double threshold : {0.03, 0.08, 0.11}) {
            auto c = clean(ProtocolId::BB84, 20'000, 13);
            c.eve = {EveKind::InterceptResend, f, BasisPolicy::RandomBasis};
            c.qber_abort_threshold = threshold;
            auto s = run_session(c);
            const bool above = s.receiver.qber.qber > threshold;
            EXPECT_EQ(s.receiver.status == SessionStatus::Aborted, above) << f << " " << threshold;
            EXPECT_EQ(s.sender.status, s.receiver.status);
        }
    }
}

TEST(Session, SampledQberTracksFullMismatchRate) {
    auto c = clean(ProtocolId::BB84, 50'000, 17);
    c.channel.noise_probability = 0.06;
    c.qber_abort_threshold = 1.0;
    auto s = run_session(c);
    const double truth = s.sifted_error_rate();
    EXPECT_NEAR(s.receiver.qber.qber, truth, oracle::three_sigma(truth, s.receiver.qber.sample_indices.size()));
}

TEST(Session, NoisyChannelStillAgrees) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = clean(ProtocolId::BB84, 20'000, seed);
        c.channel.noise_probability = 0.04;
        c.channel.loss_probability = 0.2;
        auto s = run_session(c);
        ASSERT_TRUE(s.completed());
        EXPECT_TRUE(s.keys_match());
        EXPECT_GT(s.receiver.corrections, 0u);
    }
}

TEST(Session, PoissonSourceCompletes) {
    auto c = clean(ProtocolId::BB84, 20'000, 3);
    c.source = {SourceKind::Poisson, 0.5};
    auto s = run_session(c);
    ASSERT_TRUE(s.completed());
    EXPECT_TRUE(s.keys_match());
    EXPECT_GT(s.receiver.final_key.eve_known_bound, 0u);
}

TEST(Session, DeterministicUnderSeed) {
    auto c = clean(ProtocolId::BB84, 5'000, 42);
    c.channel.noise_probability = 0.02;
    auto a = run_session(c), b = run_session(c);
    EXPECT_EQ(a.sender.transcript, b.sender.transcript);
    EXPECT_EQ(a.sender.final_key.bits, b.sender.final_key.bits);
}

TEST(Session, HelloMismatchIsProtocolError) {
    auto [a, b] = make_in_process_pair();
    auto sender_cfg = clean(ProtocolId::BB84, 2'000, 1);
    auto receiver_cfg = clean(ProtocolId::B92, 2'000, 1);
    std::exception_ptr sender_error;
    std::thread t([&] {
        try {
            (void)run_sender(sender_cfg, *a);
        } catch (...) {
            sender_error = std::current_exception();
        }
    });
    EXPECT_THROW((void)run_receiver(receiver_cfg, *b), ProtocolError);
    t.join();
    EXPECT_TRUE(sender_error != nullptr);
}

TEST(Session, ZeroizeClearsKeyMaterial) {
    auto s = run_session(clean(ProtocolId::BB84, 2'000, 1));
    s.sender.zeroize();
    EXPECT_TRUE(s.sender.final_key.bits.empty());
    EXPECT_TRUE(s.sender.raw_bits.empty());
}

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qkd/amplify.hpp"
#include "qkd/eve.hpp"
#include "qkd/session.hpp"

using namespace qkd;

namespace {

SessionConfig eve_session(double fraction, BasisPolicy policy, std::uint64_t seed) {
    SessionConfig c;
    c.n_pulses = 100'000;
    c.seed = seed;
    c.qber_abort_threshold = 1.0;  // observe the statistics, do not abort
    c.eve = {EveKind::InterceptResend, fraction, policy};
    return c;
}

}  // namespace

TEST(InterceptResend, ZeroFractionIsIdentity) {
    RandomStream rng(1);
    for (std::uint32_t s = 0; s < 1000; ++s) {
        Pulse in = prepare_pulse(s, s % 2, s % 3 ? Basis::Rectilinear : Basis::Diagonal, 1, 1.0);
        auto [out, record] = intercept_resend(in, BasisPolicy::RandomBasis, 0.0, rng);
        ASSERT_EQ(out, in);
        ASSERT_FALSE(record.has_value());
    }
}

TEST(InterceptResend, ForwardsFreshPulseInEveBasis) {
    RandomStream rng(2);
    for (std::uint32_t s = 0; s < 1000; ++s) {
        Pulse in = prepare_pulse(s, s % 2, Basis::Diagonal, 3, 1.0);
        auto [out, record] = intercept_resend(in, BasisPolicy::FixedRectilinear, 1.0, rng);
        ASSERT_TRUE(record.has_value());
        ASSERT_EQ(out.photons.size(), 3u);
        ASSERT_EQ(out.seq, s);
        for (const auto& p : out.photons) ASSERT_EQ(p.polarization(), polarization_for(record->bit_guess, Basis::Rectilinear));
    }
}

TEST(InterceptResend, Reproducible) {
    auto run = [] {
        RandomStream rng(3);
        std::vector<EveRecord> out;
        for (std::uint32_t s = 0; s < 500; ++s) {
            auto r = intercept_resend(prepare_pulse(s, 1, Basis::Diagonal, 1, 1.0), BasisPolicy::RandomBasis, 0.5, rng).second;
            if (r) out.push_back(*r);
        }
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(InterceptResend, FullInterceptionQber) {
    const double expected = oracle::intercept_resend_qber(1.0);
    ASSERT_NEAR(expected, 0.25, 1e-12);
    auto s = run_session(eve_session(1.0, BasisPolicy::RandomBasis, 7));
    EXPECT_NEAR(s.sifted_error_rate(), expected, 0.01);
    EXPECT_NEAR(s.receiver.qber.qber, expected, 0.01);
}

TEST(InterceptResend, HalfInterceptionQber) {
    const double expected = oracle::intercept_resend_qber(0.5);
    ASSERT_NEAR(expected, 0.125, 1e-12);
    auto s = run_session(eve_session(0.5, BasisPolicy::RandomBasis, 7));
    EXPECT_NEAR(s.sifted_error_rate(), expected, 0.01);
}

TEST(InterceptResend, FixedBasisQber) {
    const double expected = oracle::intercept_resend_qber(1.0, 0.0);
    ASSERT_NEAR(expected, 0.25, 1e-12);
    auto s = run_session(eve_session(1.0, BasisPolicy::FixedRectilinear, 11));
    EXPECT_NEAR(s.sifted_error_rate(), expected, oracle::three_sigma(expected, s.sender.sift.sifted_key.size()));
}

TEST(InterceptResend, KnowledgeBoundCoversTrueKnowledge) {
    auto s = run_session(eve_session(1.0, BasisPolicy::RandomBasis, 5));
    ASSERT_TRUE(s.sender.eve.has_value());
    const auto n = s.sender.sift.sifted_key.size();
    const double known = s.sender.eve->bits_known_of_sifted_key / double(n);
    EXPECT_NEAR(known, oracle::intercept_resend_certain_fraction(), 0.01);
    // Certain guesses are always right.
    std::size_t wrong = 0;
    for (const auto& r : s.sender.eve->records)
        if (r.confidence == Confidence::Certain) wrong += r.bit_guess != s.sender.raw_bits[r.seq];
    EXPECT_EQ(wrong, 0u);
    const auto l = estimate_eve_knowledge(s.receiver.qber.qber, SourceConfig{}, n);
    EXPECT_GE(l, s.sender.eve->bits_known_of_sifted_key);
    EXPECT_EQ(l, n);
}

TEST(BeamSplit, SinglePhotonGoesOneWay) {
    RandomStream rng(4);
    const int n = 100000;
    int arrived = 0, stored = 0;
    for (int i = 0; i < n; ++i) {
        auto [out, diverted] = beam_split(prepare_pulse(i, 0, Basis::Rectilinear, 1, 1.0), rng);
        ASSERT_EQ(out.photons.size() + diverted.size(), 1u);
        arrived += !out.empty();
        stored += !diverted.empty();
    }
    EXPECT_EQ(arrived + stored, n);
    EXPECT_NEAR(arrived / double(n), 0.5, 0.01);
}

TEST(BeamSplit, EmptyPulse) {
    RandomStream rng(4);
    auto [out, diverted] = beam_split(prepare_pulse(0, 0, Basis::Rectilinear, 0, 1.0), rng);
    EXPECT_TRUE(out.empty());
    EXPECT_TRUE(diverted.empty());
}

TEST(BeamSplit, PoissonBothSidesMatchBinomialOracle) {
    const double expected = oracle::beam_split_both(2.0);
    EXPECT_NEAR(expected, 1.0 - std::exp(-2.0) - 2.0 * (std::exp(-1.0) - std::exp(-2.0)), 1e-9);
    RandomStream src(8), split(9);
    SourceConfig poisson{SourceKind::Poisson, 2.0};
    const int n = 100000;
    int both = 0;
    for (int i = 0; i < n; ++i) {
        auto count = draw_photon_count(poisson, src);
        auto [out, diverted] = beam_split(prepare_pulse(i, 0, Basis::Rectilinear, count, 2.0), split);
        both += !out.empty() && !diverted.empty();
    }
    EXPECT_NEAR(both / double(n), expected, 0.01);
}

TEST(DelayedMeasure, EmptyStore) {
    RandomStream rng(1);
    std::vector<RevealedBasis> revealed{{7, Basis::Rectilinear}};
    auto k = delayed_measure_store(PhotonStore{}, revealed, rng);
    EXPECT_TRUE(k.records.empty());
    EXPECT_EQ(k.bits_known_of_sifted_key, 0u);
}

TEST(DelayedMeasure, StoredPhotonMeasuredInRevealedBasis) {
    RandomStream rng(1);
    PhotonStore store;
    store[7].push_back(encode(1, Basis::Rectilinear));
    store[8].push_back(encode(0, Basis::Diagonal));  // not sifted
    std::vector<RevealedBasis> revealed{{7, Basis::Rectilinear}};
    auto k = delayed_measure_store(store, revealed, rng);
    ASSERT_EQ(k.records.size(), 1u);
    EXPECT_EQ(k.records[0], (EveRecord{7, Basis::Rectilinear, 1, Confidence::Certain}));
    EXPECT_EQ(k.bits_known_of_sifted_key, 1u);
}

TEST(BeamSplit, SinglePhotonSessionsLeakNothing) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SessionConfig c;
        c.n_pulses = 5000;
        c.seed = seed;
        c.eve.kind = EveKind::BeamSplit;
        auto s = run_session(c);
        ASSERT_TRUE(s.sender.eve.has_value());
        EXPECT_EQ(s.sender.eve->bits_known_of_sifted_key, 0u) << "seed " << seed;
        EXPECT_EQ(beam_split_bound(c.source, s.sender.sift.sifted_key.size()), 0u);
    }
}

TEST(BeamSplit, PoissonSessionsLeakAndBoundCovers) {
    SessionConfig c;
    c.n_pulses = 20000;
    c.seed = 3;
    c.source = {SourceKind::Poisson, 0.5};
    c.eve.kind = EveKind::BeamSplit;
    auto s = run_session(c);
    ASSERT_TRUE(s.sender.eve.has_value());
    const auto n = s.sender.sift.sifted_key.size();
    EXPECT_GT(s.sender.eve->bits_known_of_sifted_key, 0u);
    EXPECT_GE(beam_split_bound(c.source, n), s.sender.eve->bits_known_of_sifted_key);
}

TEST(Eve, NeverWritesToTheTranscript) {
    for (auto kind : {EveKind::None, EveKind::InterceptResend, EveKind::BeamSplit}) {
        SessionConfig c;
        c.n_pulses = 4000;
        c.seed = 21;
        c.qber_abort_threshold = 1.0;
        c.eve.kind = kind;
        auto with = run_session(c);
        // Every message in either log was sent by one of the two parties.
        std::size_t sent = 0, received = 0;
        for (const auto* t : {&with.sender.transcript, &with.receiver.transcript})
            for (const auto& e : *t) (e.direction == Direction::Sent ? sent : received)++;
        EXPECT_EQ(sent, received);
        for (std::size_t i = 0; i < with.sender.transcript.size(); ++i)
            EXPECT_EQ(with.sender.transcript[i].message, with.receiver.transcript[i].message);
    }
}

TEST(Eve, EnablingEveLeavesPartyChoicesUnchanged) {
    SessionConfig c;
    c.n_pulses = 3000;
    c.seed = 99;
    c.qber_abort_threshold = 1.0;
    auto clean = run_session(c);
    c.eve = {EveKind::InterceptResend, 1.0, BasisPolicy::RandomBasis};
    auto tapped = run_session(c);
    EXPECT_EQ(clean.sender.raw_bits, tapped.sender.raw_bits);
    EXPECT_EQ(clean.sender.bases, tapped.sender.bases);
    EXPECT_EQ(clean.receiver.bases, tapped.receiver.bases);
}

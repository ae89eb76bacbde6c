#include "qkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qkd/errors.hpp"

namespace qkd {

// ---------------------------------------------------------------------------
// Configuration

void validate(const SessionConfig& c) {
    auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (c.n_pulses == 0) throw ConfigError("pulse count must be positive");
    if (!(c.sample_fraction > 0.0 && c.sample_fraction < 1.0)) {
        throw ConfigError("sample fraction must lie in (0, 1)");
    }
    if (!in_unit(c.qber_abort_threshold)) throw ConfigError("QBER threshold must lie in [0, 1]");
    if (!in_unit(c.channel.loss_probability)) throw ConfigError("loss probability must lie in [0, 1]");
    if (!in_unit(c.channel.noise_probability)) throw ConfigError("noise probability must lie in [0, 1]");
    if (!in_unit(c.eve.intercept_fraction)) throw ConfigError("intercept fraction must lie in [0, 1]");
    if (c.source.kind == SourceKind::Poisson) {
        double mu = c.source.mean_photon_number;
        if (!(std::isfinite(mu) && mu > 0.0 && mu <= 20.0)) {
            throw ConfigError("mean photon number must lie in (0, 20]");
        }
        if (c.protocol == ProtocolId::E91) throw ConfigError("E91 uses one entangled pair per pulse; use a single-photon source");
    }
    if (c.reconcile_rounds == 0 || c.reconcile_rounds > 16) throw ConfigError("reconciliation rounds must lie in [1, 16]");
    if (c.security_param > 4096) throw ConfigError("security parameter must be at most 4096 bits");

    double key_bits = expected_sifted_length(c) * (1.0 - c.sample_fraction);
    if (key_bits < 8.0) {
        throw ConfigError("configuration leaves about " + std::to_string(key_bits) +
                          " key bits after sampling; at least 8 are required");
    }
}

double expected_sifted_length(const SessionConfig& c) {
    const double survive = 1.0 - c.channel.loss_probability;
    double arrival = survive;
    if (c.source.kind == SourceKind::Poisson) arrival = 1.0 - std::exp(-c.source.mean_photon_number * survive);
    const double keep = c.protocol == ProtocolId::B92 ? 0.25 : 0.5;
    return static_cast<double>(c.n_pulses) * arrival * keep;
}

SessionStreams derive_streams(std::uint64_t seed) {
    RandomStream master(seed);
    return SessionStreams{master.split(1), master.split(2), master.split(3), master.split(4), master.split(5)};
}

// ---------------------------------------------------------------------------
// Sifting and error estimation

SiftResult sift(std::span<const Basis> own_bases, std::span<const Basis> peer_bases,
                std::span<const std::uint8_t> received_mask, std::span<const std::uint8_t> own_bits) {
    const auto n = own_bases.size();
    if (peer_bases.size() != n || received_mask.size() != n || own_bits.size() != n) {
        throw ProtocolError("sift: basis, mask and bit lists differ in length");
    }
    SiftResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (received_mask[i] && own_bases[i] == peer_bases[i]) {
            result.kept_indices.push_back(static_cast<std::uint32_t>(i));
            result.sifted_key.push_back(own_bits[i]);
        }
    }
    return result;
}

namespace {

QberReportData compare_disclosures(std::vector<std::uint32_t> sample, Bits bits_a, const Bits& bits_b) {
    if (bits_a.size() != sample.size() || bits_b.size() != sample.size()) {
        throw ProtocolError("sample disclosure has the wrong length");
    }
    QberReportData report;
    report.mismatches = hamming_distance(bits_a, bits_b);
    report.qber = sample.empty() ? 0.0
                                 : static_cast<double>(report.mismatches) / static_cast<double>(sample.size());
    report.sample_indices = std::move(sample);
    report.disclosed_bits = std::move(bits_a);
    return report;
}

void check_indices(std::span<const std::uint32_t> indices, std::size_t limit, const char* what) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= limit) throw ProtocolError(std::string(what) + ": index out of range");
        if (i > 0 && indices[i] <= indices[i - 1]) {
            throw ProtocolError(std::string(what) + ": indices not strictly increasing");
        }
    }
}

}  // namespace

QberReportData estimate_qber(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b,
                             std::span<const std::uint32_t> sample_indices) {
    if (key_a.size() != key_b.size()) throw ProtocolError("estimate_qber: key lengths differ");
    for (auto i : sample_indices) {
        if (i >= key_a.size()) throw ProtocolError("estimate_qber: sample index out of range");
    }
    return compare_disclosures({sample_indices.begin(), sample_indices.end()}, select_bits(key_a, sample_indices),
                               select_bits(key_b, sample_indices));
}

std::vector<std::uint32_t> choose_sample(std::size_t n, double fraction, RandomStream& rng) {
    auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    m = std::min(m, n);
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

void PartyOutcome::zeroize() {
    secure_clear(raw_bits);
    secure_clear(sift.sifted_key);
    secure_clear(qber.disclosed_bits);
    secure_clear(reconciled.bits);
    secure_clear(final_key.bits);
}

// ---------------------------------------------------------------------------
// Party state machines

namespace {

struct PeerAborted {
    AbortReason reason;
};

template <class T>
T expect(Transport& transport) {
    auto msg = transport.recv();
    if (auto* m = std::get_if<T>(&msg)) return std::move(*m);
    if (const auto* a = std::get_if<Abort>(&msg)) throw PeerAborted{a->reason};
    throw ProtocolError("expected " + std::string(message_name(ClassicalMessage{T{}})) + ", got " +
                        std::string(message_name(msg)));
}

std::vector<Basis> random_bases(RandomStream& rng, std::size_t n) {
    std::vector<Basis> bases(n);
    for (auto& b : bases) b = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
    return bases;
}

std::vector<std::uint32_t> remove_positions(const std::vector<std::uint32_t>& values,
                                            std::span<const std::uint32_t> sorted_positions) {
    std::vector<std::uint32_t> out;
    out.reserve(values.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (next < sorted_positions.size() && sorted_positions[next] == i) {
            ++next;
            continue;
        }
        out.push_back(values[i]);
    }
    return out;
}

class PartyMachine {
public:
    enum class State { Hello, Quantum, Discussion, Sampling, Reconciliation, Amplification, Done };

    PartyMachine(const SessionConfig& config, Transport& transport, Role role)
        : config_(config), transport_(transport), streams_(derive_streams(config.seed)) {
        out_.role = role;
    }

protected:
    // Runs `body`, mapping peer aborts onto the outcome and notifying the peer
    // of local protocol violations.
    template <class Body>
    PartyOutcome drive(Body&& body) {
        validate(config_);
        try {
            body();
        } catch (const PeerAborted& a) {
            if (a.reason == AbortReason::PeerError) {
                throw ProtocolError("peer aborted during " + std::string(state_name()));
            }
            abort_locally(a.reason);
        } catch (const ProtocolError&) {
            notify_peer(AbortReason::PeerError);
            throw;
        } catch (const FramingError&) {
            notify_peer(AbortReason::PeerError);
            throw;
        }
        return std::move(out_);
    }

    void abort_locally(AbortReason reason) {
        out_.status = SessionStatus::Aborted;
        out_.abort_reason = reason;
    }

    void notify_peer(AbortReason reason) noexcept {
        try {
            transport_.send(Abort{reason});
        } catch (...) {
        }
    }

    const char* state_name() const {
        static constexpr const char* names[] = {"hello",         "quantum transmission", "basis discussion",
                                                "sampling",      "reconciliation",       "privacy amplification",
                                                "done"};
        return names[static_cast<int>(state_)];
    }

    void check_hello(const ProtocolHello& peer) {
        if (peer != own_hello()) {
            throw ProtocolError("hello mismatch: peer runs " + std::string(to_string(peer.protocol)) + " with " +
                                std::to_string(peer.pulse_count) + " pulses, local config " +
                                std::string(to_string(config_.protocol)) + " with " +
                                std::to_string(config_.n_pulses));
        }
    }

    ProtocolHello own_hello() const { return ProtocolHello{config_.protocol, config_.n_pulses}; }

    // Drops the disclosed sample from the sifted key.
    void consume_sample() {
        const auto& sample = out_.qber.sample_indices;
        out_.reconciled.stage = KeyStage::Sifted;
        out_.reconciled.bits = remove_bits(out_.sift.sifted_key, sample);
        out_.key_indices = remove_positions(out_.sift.kept_indices, sample);
    }

    bool qber_exceeded() const { return out_.qber.qber > config_.qber_abort_threshold; }

    std::size_t eve_bound() const {
        return estimate_eve_knowledge(out_.qber.qber, config_.source, out_.reconciled.bits.size());
    }

    std::size_t output_length(std::size_t leaked, std::size_t eve) const {
        return pa_output_length(out_.reconciled.bits.size(), leaked, eve, config_.security_param);
    }

    void finish(Bits final_bits) {
        out_.final_key.stage = KeyStage::Final;
        out_.final_key.bits = std::move(final_bits);
        out_.final_key.leaked_bits = out_.reconciled.leaked_bits;
        out_.final_key.eve_known_bound = out_.reconciled.eve_known_bound;
        out_.status = SessionStatus::Completed;
        state_ = State::Done;
    }

    const SessionConfig& config_;
    Transport& transport_;
    SessionStreams streams_;
    PartyOutcome out_;
    State state_ = State::Hello;
};

class SenderMachine : PartyMachine {
public:
    SenderMachine(const SessionConfig& config, Transport& transport)
        : PartyMachine(config, transport, Role::Sender) {}

    PartyOutcome run() {
        if (config_.eve.kind != EveKind::None) eve_.emplace(config_.eve, streams_.eve);
        auto outcome = drive([this] {
            hello();
            transmit();
            discuss();
            sample();
            if (reconcile()) amplify();
        });
        if (eve_) outcome.eve = eve_->conclude(transport_.transcript(), &pairs_);
        outcome.transcript = transport_.transcript();
        return outcome;
    }

private:
    void hello() {
        state_ = State::Hello;
        transport_.send(own_hello());
        ProtocolHello peer;
        try {
            peer = expect<ProtocolHello>(transport_);
        } catch (const PeerAborted&) {
            throw ProtocolError("receiver rejected the session hello (configuration mismatch)");
        }
        check_hello(peer);
    }

    void transmit() {
        state_ = State::Quantum;
        const std::uint32_t n = config_.n_pulses;
        auto& rng = streams_.sender;
        QuantumChannelConfig channel{config_.channel.loss_probability, config_.channel.noise_probability,
                                     eve_ ? &*eve_ : nullptr};
        const double mu = config_.source.kind == SourceKind::Poisson ? config_.source.mean_photon_number : 1.0;

        std::vector<Pulse> arrivals;
        arrivals.reserve(n);
        switch (config_.protocol) {
            case ProtocolId::BB84:
            case ProtocolId::B92: {
                out_.raw_bits = random_bits(rng, n);
                if (config_.protocol == ProtocolId::BB84) {
                    out_.bases = random_bases(rng, n);
                } else {
                    // Two states only: bit 0 -> 0deg, bit 1 -> 45deg.
                    out_.bases.resize(n);
                    for (std::uint32_t i = 0; i < n; ++i) {
                        out_.bases[i] = out_.raw_bits[i] ? Basis::Diagonal : Basis::Rectilinear;
                    }
                }
                for (std::uint32_t i = 0; i < n; ++i) {
                    auto count = draw_photon_count(config_.source, streams_.source);
                    std::uint8_t encoded = config_.protocol == ProtocolId::BB84 ? out_.raw_bits[i] : 0;
                    auto pulse = prepare_pulse(i, encoded, out_.bases[i], count, mu);
                    arrivals.push_back(transmit_pulse(std::move(pulse), channel, streams_.channel, &pairs_));
                }
                break;
            }
            case ProtocolId::E91: {
                // The pair source sits with the sender; the B photons cross the
                // channel, then the sender measures its A photons.
                out_.bases = random_bases(rng, n);
                out_.raw_bits.resize(n);
                for (std::uint32_t i = 0; i < n; ++i) {
                    auto [mine, theirs] = pairs_.make_pair(i);
                    Pulse pulse{i, {theirs}, 1.0};
                    pulse = transmit_pulse(std::move(pulse), channel, streams_.channel, &pairs_);
                    out_.raw_bits[i] = measure(mine, out_.bases[i], rng, &pairs_).bit;
                    for (auto& photon : pulse.photons) pairs_.try_resolve(photon);
                    arrivals.push_back(std::move(pulse));
                }
                break;
            }
        }
        transport_.send_pulses(arrivals);
    }

    void discuss() {
        state_ = State::Discussion;
        const auto n = config_.n_pulses;
        if (config_.protocol == ProtocolId::B92) {
            auto conclusive = expect<SiftIndices>(transport_);
            check_indices(conclusive.indices, n, "conclusive positions");
            out_.sift.kept_indices = conclusive.indices;
            out_.sift.sifted_key = select_bits(out_.raw_bits, conclusive.indices);
            transport_.send(conclusive);
            return;
        }
        auto reveal = expect<BasisReveal>(transport_);
        if (reveal.bases.size() != n || reveal.received_mask.size() != n) {
            throw ProtocolError("basis reveal does not cover every pulse");
        }
        out_.received_mask = std::move(reveal.received_mask);
        out_.sift = qkd::sift(out_.bases, reveal.bases, out_.received_mask, out_.raw_bits);
        transport_.send(SiftIndices{out_.sift.kept_indices});
    }

    void sample() {
        state_ = State::Sampling;
        auto request = expect<SampleRequest>(transport_);
        check_indices(request.indices, out_.sift.sifted_key.size(), "sample request");
        auto mine = select_bits(out_.sift.sifted_key, request.indices);
        transport_.send(SampleDisclosure{mine});
        auto theirs = expect<SampleDisclosure>(transport_);
        out_.qber = compare_disclosures(std::move(request.indices), std::move(mine), theirs.bits);

        auto report = expect<QberReport>(transport_);
        if (report.mismatches != out_.qber.mismatches || report.sample_size != out_.qber.sample_indices.size()) {
            throw ProtocolError("receiver's QBER report disagrees with the disclosed sample");
        }
        consume_sample();
    }

    bool reconcile() {
        state_ = State::Reconciliation;
        ReconcileReference reference(out_.reconciled.bits);
        bool first = true;
        while (!reference.finished()) {
            auto msg = transport_.recv();
            if (const auto* a = std::get_if<Abort>(&msg)) throw PeerAborted{a->reason};
            if (first && qber_exceeded()) throw ProtocolError("receiver continued past an excessive QBER");
            first = false;
            if (auto reply = reference.handle(msg)) transport_.send(*reply);
        }
        out_.reconciled.stage = KeyStage::Reconciled;
        out_.reconciled.leaked_bits = reference.leaked_bits();
        out_.reconciled.eve_known_bound = eve_bound();
        return true;
    }

    void amplify() {
        state_ = State::Amplification;
        auto params = expect<PaParams>(transport_);
        const auto expected = output_length(out_.reconciled.leaked_bits, out_.reconciled.eve_known_bound);
        if (params.out_len != expected || params.security_param != config_.security_param) {
            throw ProtocolError("privacy amplification parameters disagree with local accounting");
        }
        Bits final_bits;
        try {
            final_bits = privacy_amplify(out_.reconciled.bits, params);
        } catch (const ParameterError& e) {
            throw ProtocolError(e.what());
        }
        finish(std::move(final_bits));
    }

    std::optional<Eve> eve_;
    PairRegistry pairs_;
};

class ReceiverMachine : PartyMachine {
public:
    ReceiverMachine(const SessionConfig& config, Transport& transport)
        : PartyMachine(config, transport, Role::Receiver) {}

    PartyOutcome run() {
        auto outcome = drive([this] {
            hello();
            measure_arrivals();
            discuss();
            if (sample() && reconcile()) amplify();
        });
        outcome.transcript = transport_.transcript();
        return outcome;
    }

private:
    void hello() {
        state_ = State::Hello;
        auto peer = expect<ProtocolHello>(transport_);
        check_hello(peer);
        transport_.send(own_hello());
    }

    void measure_arrivals() {
        state_ = State::Quantum;
        const std::uint32_t n = config_.n_pulses;
        auto& rng = streams_.receiver;
        out_.bases = random_bases(rng, n);

        auto pulses = transport_.recv_pulses();
        if (pulses.size() != n) throw ProtocolError("pulse batch size differs from the announced count");

        out_.raw_bits.assign(n, 0);
        out_.received_mask.assign(n, 0);
        for (std::uint32_t i = 0; i < n; ++i) {
            auto& pulse = pulses[i];
            if (pulse.seq != i) throw ProtocolError("pulse records out of sequence");
            if (pulse.photons.empty()) continue;
            out_.received_mask[i] = 1;
            auto outcome = measure(pulse.photons.front(), out_.bases[i], rng);
            if (config_.protocol != ProtocolId::B92) {
                out_.raw_bits[i] = outcome.bit;
                continue;
            }
            // 90deg rules out the 0deg state (sender bit 1); 135deg rules out 45deg (bit 0).
            if (outcome.post_state == Polarization::Deg90) {
                conclusive_.push_back(i);
                out_.raw_bits[i] = 1;
            } else if (outcome.post_state == Polarization::Deg135) {
                conclusive_.push_back(i);
                out_.raw_bits[i] = 0;
            }
        }
    }

    void discuss() {
        state_ = State::Discussion;
        const auto n = config_.n_pulses;
        if (config_.protocol == ProtocolId::B92) {
            transport_.send(SiftIndices{conclusive_});
            auto echo = expect<SiftIndices>(transport_);
            if (echo.indices != conclusive_) throw ProtocolError("sender did not confirm the conclusive positions");
            out_.sift.kept_indices = std::move(conclusive_);
        } else {
            transport_.send(BasisReveal{out_.bases, out_.received_mask});
            auto kept = expect<SiftIndices>(transport_);
            check_indices(kept.indices, n, "sift indices");
            for (auto i : kept.indices) {
                if (!out_.received_mask[i]) throw ProtocolError("sift kept a pulse that never arrived");
            }
            out_.sift.kept_indices = std::move(kept.indices);
        }
        out_.sift.sifted_key = select_bits(out_.raw_bits, out_.sift.kept_indices);
    }

    bool sample() {
        state_ = State::Sampling;
        auto indices = choose_sample(out_.sift.sifted_key.size(), config_.sample_fraction, streams_.receiver);
        transport_.send(SampleRequest{indices});
        auto theirs = expect<SampleDisclosure>(transport_);
        auto mine = select_bits(out_.sift.sifted_key, indices);
        transport_.send(SampleDisclosure{mine});
        out_.qber = compare_disclosures(std::move(indices), std::move(theirs.bits), mine);
        transport_.send(QberReport{static_cast<std::uint32_t>(out_.qber.mismatches),
                                   static_cast<std::uint32_t>(out_.qber.sample_indices.size())});
        consume_sample();

        if (qber_exceeded()) {
            transport_.send(Abort{AbortReason::QberExceeded});
            abort_locally(AbortReason::QberExceeded);
            return false;
        }
        return true;
    }

    bool reconcile() {
        state_ = State::Reconciliation;
        ReconcileSchedule schedule{streams_.receiver.next(),
                                   default_block_schedule(out_.qber.qber, out_.reconciled.bits.size(),
                                                          config_.reconcile_rounds)};
        ReconcileCorrector corrector(out_.reconciled.bits, std::move(schedule));
        while (auto request = corrector.next_request()) {
            transport_.send(*request);
            if (!corrector.awaiting_reply()) continue;
            auto reply = transport_.recv();
            if (const auto* a = std::get_if<Abort>(&reply)) throw PeerAborted{a->reason};
            corrector.on_reply(reply);
        }
        out_.corrections = corrector.corrections();
        if (!corrector.verified()) {
            transport_.send(Abort{AbortReason::ReconciliationFailed});
            abort_locally(AbortReason::ReconciliationFailed);
            return false;
        }
        out_.reconciled.stage = KeyStage::Reconciled;
        out_.reconciled.bits = corrector.key();
        out_.reconciled.leaked_bits = corrector.leaked_bits();
        out_.reconciled.eve_known_bound = eve_bound();
        return true;
    }

    void amplify() {
        state_ = State::Amplification;
        PaParams params;
        params.out_len = static_cast<std::uint32_t>(
            output_length(out_.reconciled.leaked_bits, out_.reconciled.eve_known_bound));
        params.security_param = config_.security_param;
        params.toeplitz_seed =
            random_bits(streams_.receiver, toeplitz_seed_length(out_.reconciled.bits.size(), params.out_len));
        transport_.send(params);
        finish(privacy_amplify(out_.reconciled.bits, params));
    }

    std::vector<std::uint32_t> conclusive_;
};

}  // namespace

PartyOutcome run_sender(const SessionConfig& config, Transport& transport) {
    return SenderMachine(config, transport).run();
}

PartyOutcome run_receiver(const SessionConfig& config, Transport& transport) {
    return ReceiverMachine(config, transport).run();
}

}  // namespace qkd

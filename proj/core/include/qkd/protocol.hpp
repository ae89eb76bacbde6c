#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkd/amplify.hpp"
#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/eve.hpp"
#include "qkd/quantum.hpp"
#include "qkd/reconcile.hpp"
#include "qkd/rng.hpp"
#include "qkd/transport.hpp"
#include "qkd/wire.hpp"

namespace qkd {

struct ChannelSettings {
    double loss_probability = 0.0;
    double noise_probability = 0.0;

    bool operator==(const ChannelSettings&) const = default;
};

/// Every knob of one protocol run. Both parties must hold the same config.
struct SessionConfig {
    ProtocolId protocol = ProtocolId::BB84;
    std::uint32_t n_pulses = 10'000;
    double sample_fraction = 0.25;
    double qber_abort_threshold = 0.11;
    ChannelSettings channel;
    EveConfig eve;
    SourceConfig source;
    std::uint32_t reconcile_rounds = kDefaultReconcileRounds;
    std::uint32_t security_param = kDefaultSecurityParam;
    std::uint64_t seed = 0;

    bool operator==(const SessionConfig&) const = default;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const SessionConfig& config);

/// Sifted key length the config is expected to produce, before sampling.
double expected_sifted_length(const SessionConfig& config);

/// Independent streams derived from the master seed, so that e.g. enabling
/// Eve leaves the parties' basis and bit choices unchanged.
struct SessionStreams {
    RandomStream sender;
    RandomStream receiver;
    RandomStream eve;
    RandomStream channel;
    RandomStream source;
};

SessionStreams derive_streams(std::uint64_t seed);

struct SiftResult {
    std::vector<std::uint32_t> kept_indices;
    Bits sifted_key;
};

/// Keeps positions where the bases agree and the pulse arrived (mask bit 1).
/// Throws ProtocolError on length mismatch.
SiftResult sift(std::span<const Basis> own_bases, std::span<const Basis> peer_bases,
                std::span<const std::uint8_t> received_mask, std::span<const std::uint8_t> own_bits);

struct QberReportData {
    std::vector<std::uint32_t> sample_indices;
    Bits disclosed_bits;
    std::size_t mismatches = 0;
    double qber = 0.0;
};

/// Compares the keys at `sample_indices`; disclosed_bits holds key_a's bits
/// there. Throws ProtocolError for out-of-range indices or unequal lengths.
QberReportData estimate_qber(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b,
                             std::span<const std::uint32_t> sample_indices);

/// Sorted, distinct positions of a uniformly random sample of round(fraction * n).
std::vector<std::uint32_t> choose_sample(std::size_t n, double fraction, RandomStream& rng);

enum class Role : std::uint8_t { Sender, Receiver };
enum class SessionStatus : std::uint8_t { Completed, Aborted };

struct PartyOutcome {
    Role role = Role::Sender;
    SessionStatus status = SessionStatus::Aborted;
    std::optional<AbortReason> abort_reason;

    Bits raw_bits;
    std::vector<Basis> bases;
    Bits received_mask;
    SiftResult sift;
    QberReportData qber;

    /// Raw pulse positions that make up the reconciled and final keys.
    std::vector<std::uint32_t> key_indices;
    KeyMaterial reconciled;
    KeyMaterial final_key;
    std::size_t corrections = 0;

    /// Simulator-side ground truth; only the sender hosts Eve.
    std::optional<EveKnowledge> eve;
    Transcript transcript;

    void zeroize();
};

/// Sender state machine: prepares and transmits pulses (hosting the simulated
/// channel and any eavesdropper), answers the public discussion, and applies
/// the receiver's reconciliation and amplification parameters.
/// Throws ProtocolError, ConnectionError or FramingError; a QBER or
/// reconciliation abort is reported through the outcome status.
PartyOutcome run_sender(const SessionConfig& config, Transport& transport);

/// Receiver state machine: measures arrivals, drives sifting, sampling,
/// reconciliation and privacy amplification.
PartyOutcome run_receiver(const SessionConfig& config, Transport& transport);

}  // namespace qkd

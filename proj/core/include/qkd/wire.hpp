#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/quantum.hpp"

namespace qkd {

// Frame: u32 BE payload length | u8 tag | payload.
inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::uint32_t kMaxPayloadSize = 64u << 20;

enum class MessageTag : std::uint8_t {
    ProtocolHello = 0x01,
    BasisReveal = 0x02,
    SiftIndices = 0x03,
    SampleRequest = 0x04,
    SampleDisclosure = 0x05,
    QberReport = 0x06,
    Abort = 0x07,
    PaParams = 0x08,
    Ciphertext = 0x09,
    Reconcile = 0x0A,
    // Transport-level, not part of the public-discussion transcript.
    PulseBatch = 0x10,
};

enum class ProtocolId : std::uint8_t { BB84 = 0x01, B92 = 0x02, E91 = 0x03 };

enum class AbortReason : std::uint8_t {
    QberExceeded = 0x01,
    PeerError = 0x02,
    User = 0x03,
    ReconciliationFailed = 0x04,
};

enum class ReconcileSubtype : std::uint8_t {
    Start = 0x01,
    ParityQuery = 0x02,
    ParityReply = 0x03,
    VerifyRequest = 0x04,
    VerifyReply = 0x05,
};

std::string_view to_string(ProtocolId id);
std::string_view to_string(AbortReason reason);

struct ProtocolHello {
    ProtocolId protocol = ProtocolId::BB84;
    std::uint32_t pulse_count = 0;
    bool operator==(const ProtocolHello&) const = default;
};

/// Receiver's measurement bases plus the mask of pulses that arrived.
struct BasisReveal {
    std::vector<Basis> bases;
    Bits received_mask;
    bool operator==(const BasisReveal&) const = default;
};

struct SiftIndices {
    std::vector<std::uint32_t> indices;
    bool operator==(const SiftIndices&) const = default;
};

/// Positions within the sifted key to be disclosed.
struct SampleRequest {
    std::vector<std::uint32_t> indices;
    bool operator==(const SampleRequest&) const = default;
};

struct SampleDisclosure {
    Bits bits;
    bool operator==(const SampleDisclosure&) const = default;
};

struct QberReport {
    std::uint32_t mismatches = 0;
    std::uint32_t sample_size = 0;
    bool operator==(const QberReport&) const = default;
};

struct Abort {
    AbortReason reason = AbortReason::User;
    bool operator==(const Abort&) const = default;
};

struct PaParams {
    std::uint32_t out_len = 0;
    std::uint32_t security_param = 0;
    Bits toeplitz_seed;
    bool operator==(const PaParams&) const = default;
};

struct Ciphertext {
    std::uint32_t key_offset = 0;
    std::vector<std::uint8_t> bytes;
    bool operator==(const Ciphertext&) const = default;
};

struct ReconcileStart {
    std::uint64_t permutation_seed = 0;
    std::vector<std::uint32_t> block_sizes;
    bool operator==(const ReconcileStart&) const = default;
};

/// Half-open ranges [flat[2i], flat[2i+1]) in the round's permuted order.
struct ParityQuery {
    std::uint32_t round = 0;
    std::vector<std::uint32_t> ranges;
    bool operator==(const ParityQuery&) const = default;
};

struct ParityReply {
    Bits parities;
    bool operator==(const ParityReply&) const = default;
};

struct VerifyRequest {
    bool operator==(const VerifyRequest&) const = default;
};

struct VerifyReply {
    std::uint8_t parity = 0;
    std::uint32_t checksum = 0;
    bool operator==(const VerifyReply&) const = default;
};

using ClassicalMessage =
    std::variant<ProtocolHello, BasisReveal, SiftIndices, SampleRequest, SampleDisclosure, QberReport,
                 Abort, PaParams, Ciphertext, ReconcileStart, ParityQuery, ParityReply, VerifyRequest,
                 VerifyReply>;

MessageTag tag_of(const ClassicalMessage& msg);
std::string_view message_name(const ClassicalMessage& msg);

std::vector<std::uint8_t> encode_frame(const ClassicalMessage& msg);
/// Decodes exactly one frame; truncation, trailing bytes or unknown tags raise FramingError.
ClassicalMessage decode_frame(std::span<const std::uint8_t> frame);

/// Pulse records for the two-process mode. Photons must be definitely polarized.
std::vector<std::uint8_t> encode_pulse_frame(std::span<const Pulse> pulses);
std::vector<Pulse> decode_pulse_frame(std::span<const std::uint8_t> frame);

/// Payload length declared by a frame header.
std::uint32_t declared_payload_length(std::span<const std::uint8_t, kFrameHeaderSize> header);

}  // namespace qkd

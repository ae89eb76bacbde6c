#include "qkd/wire.hpp"

#include <cstring>
#include <iterator>
#include <string>

#include "qkd/errors.hpp"

namespace qkd {
namespace {

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }
    void f64(double v) {
        std::uint64_t raw;
        static_assert(sizeof raw == sizeof v);
        std::memcpy(&raw, &v, sizeof raw);
        u64(raw);
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    void bit_string(std::span<const std::uint8_t> bits) {
        u32(checked_count(bits.size()));
        bytes(pack_bits(bits));
    }
    void index_list(std::span<const std::uint32_t> indices) {
        u32(checked_count(indices.size()));
        for (auto i : indices) u32(i);
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    static std::uint32_t checked_count(std::size_t n) {
        if (n > 0xFFFFFFFFu) throw FramingError("count does not fit in 32 bits");
        return static_cast<std::uint32_t>(n);
    }

    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        auto b = take(4);
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
               std::uint32_t{b[3]};
    }
    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    double f64() {
        std::uint64_t raw = u64();
        double v;
        std::memcpy(&v, &raw, sizeof v);
        return v;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (in_.size() - pos_ < n) throw FramingError("payload truncated");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    Bits bit_string() {
        std::size_t count = u32();
        return unpack_bits(take((count + 7) / 8), count);
    }
    std::vector<std::uint32_t> index_list() {
        std::size_t count = u32();
        if (count > remaining() / 4) throw FramingError("index list longer than payload");
        std::vector<std::uint32_t> out(count);
        for (auto& v : out) v = u32();
        return out;
    }

    std::size_t remaining() const { return in_.size() - pos_; }
    void expect_end() const {
        if (remaining() != 0) throw FramingError("trailing bytes after payload");
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> bases_to_bits(std::span<const Basis> bases) {
    Bits bits(bases.size());
    for (std::size_t i = 0; i < bases.size(); ++i) bits[i] = static_cast<std::uint8_t>(bases[i]);
    return bits;
}

std::vector<Basis> bits_to_bases(const Bits& bits) {
    std::vector<Basis> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = static_cast<Basis>(bits[i]);
    return out;
}

void encode_payload(ByteWriter& w, const ProtocolHello& m) {
    w.u8(static_cast<std::uint8_t>(m.protocol));
    w.u32(m.pulse_count);
}
void encode_payload(ByteWriter& w, const BasisReveal& m) {
    w.bit_string(bases_to_bits(m.bases));
    w.bit_string(m.received_mask);
}
void encode_payload(ByteWriter& w, const SiftIndices& m) { w.index_list(m.indices); }
void encode_payload(ByteWriter& w, const SampleRequest& m) { w.index_list(m.indices); }
void encode_payload(ByteWriter& w, const SampleDisclosure& m) { w.bit_string(m.bits); }
void encode_payload(ByteWriter& w, const QberReport& m) {
    w.u32(m.mismatches);
    w.u32(m.sample_size);
}
void encode_payload(ByteWriter& w, const Abort& m) { w.u8(static_cast<std::uint8_t>(m.reason)); }
void encode_payload(ByteWriter& w, const PaParams& m) {
    w.u32(m.out_len);
    w.u32(m.security_param);
    w.bit_string(m.toeplitz_seed);
}
void encode_payload(ByteWriter& w, const Ciphertext& m) {
    w.u32(m.key_offset);
    w.u32(static_cast<std::uint32_t>(m.bytes.size()));
    w.bytes(m.bytes);
}
void encode_payload(ByteWriter& w, const ReconcileStart& m) {
    w.u8(static_cast<std::uint8_t>(ReconcileSubtype::Start));
    w.u64(m.permutation_seed);
    w.index_list(m.block_sizes);
}
void encode_payload(ByteWriter& w, const ParityQuery& m) {
    w.u8(static_cast<std::uint8_t>(ReconcileSubtype::ParityQuery));
    w.u32(m.round);
    w.index_list(m.ranges);
}
void encode_payload(ByteWriter& w, const ParityReply& m) {
    w.u8(static_cast<std::uint8_t>(ReconcileSubtype::ParityReply));
    w.bit_string(m.parities);
}
void encode_payload(ByteWriter& w, const VerifyRequest&) {
    w.u8(static_cast<std::uint8_t>(ReconcileSubtype::VerifyRequest));
}
void encode_payload(ByteWriter& w, const VerifyReply& m) {
    w.u8(static_cast<std::uint8_t>(ReconcileSubtype::VerifyReply));
    w.u8(m.parity);
    w.u32(m.checksum);
}

ClassicalMessage decode_reconcile(ByteReader& r) {
    switch (static_cast<ReconcileSubtype>(r.u8())) {
        case ReconcileSubtype::Start: {
            ReconcileStart m;
            m.permutation_seed = r.u64();
            m.block_sizes = r.index_list();
            return m;
        }
        case ReconcileSubtype::ParityQuery: {
            ParityQuery m;
            m.round = r.u32();
            m.ranges = r.index_list();
            if (m.ranges.size() % 2 != 0) throw FramingError("parity query with odd range list");
            return m;
        }
        case ReconcileSubtype::ParityReply: return ParityReply{r.bit_string()};
        case ReconcileSubtype::VerifyRequest: return VerifyRequest{};
        case ReconcileSubtype::VerifyReply: {
            VerifyReply m;
            m.parity = r.u8();
            m.checksum = r.u32();
            return m;
        }
    }
    throw FramingError("unknown reconciliation sub-type");
}

ClassicalMessage decode_payload(MessageTag tag, ByteReader& r) {
    switch (tag) {
        case MessageTag::ProtocolHello: {
            ProtocolHello m;
            auto id = r.u8();
            if (id < 0x01 || id > 0x03) throw FramingError("unknown protocol id " + std::to_string(id));
            m.protocol = static_cast<ProtocolId>(id);
            m.pulse_count = r.u32();
            return m;
        }
        case MessageTag::BasisReveal: {
            BasisReveal m;
            m.bases = bits_to_bases(r.bit_string());
            m.received_mask = r.bit_string();
            return m;
        }
        case MessageTag::SiftIndices: return SiftIndices{r.index_list()};
        case MessageTag::SampleRequest: return SampleRequest{r.index_list()};
        case MessageTag::SampleDisclosure: return SampleDisclosure{r.bit_string()};
        case MessageTag::QberReport: {
            QberReport m;
            m.mismatches = r.u32();
            m.sample_size = r.u32();
            return m;
        }
        case MessageTag::Abort: {
            auto code = r.u8();
            if (code < 0x01 || code > 0x04) throw FramingError("unknown abort reason " + std::to_string(code));
            return Abort{static_cast<AbortReason>(code)};
        }
        case MessageTag::PaParams: {
            PaParams m;
            m.out_len = r.u32();
            m.security_param = r.u32();
            m.toeplitz_seed = r.bit_string();
            return m;
        }
        case MessageTag::Ciphertext: {
            Ciphertext m;
            m.key_offset = r.u32();
            auto len = r.u32();
            auto body = r.take(len);
            m.bytes.assign(body.begin(), body.end());
            return m;
        }
        case MessageTag::Reconcile: return decode_reconcile(r);
        case MessageTag::PulseBatch: break;
    }
    throw FramingError("unknown message tag " + std::to_string(static_cast<int>(tag)));
}

std::vector<std::uint8_t> with_header(MessageTag tag, std::vector<std::uint8_t> payload) {
    if (payload.size() > kMaxPayloadSize) throw FramingError("payload exceeds maximum frame size");
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.u8(static_cast<std::uint8_t>(tag));
    w.bytes(payload);
    return w.take();
}

std::pair<MessageTag, std::span<const std::uint8_t>> split_frame(std::span<const std::uint8_t> frame) {
    if (frame.size() < kFrameHeaderSize) throw FramingError("frame shorter than header");
    auto length = declared_payload_length(frame.first<kFrameHeaderSize>());
    auto payload = frame.subspan(kFrameHeaderSize);
    if (payload.size() < length) throw FramingError("frame truncated: declared " + std::to_string(length) +
                                                    " payload bytes, got " + std::to_string(payload.size()));
    if (payload.size() > length) throw FramingError("trailing bytes after frame");
    return {static_cast<MessageTag>(frame[4]), payload};
}

}  // namespace

std::string_view to_string(ProtocolId id) {
    switch (id) {
        case ProtocolId::BB84: return "bb84";
        case ProtocolId::B92: return "b92";
        case ProtocolId::E91: return "e91";
    }
    return "unknown";
}

std::string_view to_string(AbortReason reason) {
    switch (reason) {
        case AbortReason::QberExceeded: return "qber_exceeded";
        case AbortReason::PeerError: return "peer_error";
        case AbortReason::User: return "user";
        case AbortReason::ReconciliationFailed: return "reconciliation_failed";
    }
    return "unknown";
}

MessageTag tag_of(const ClassicalMessage& msg) {
    static constexpr MessageTag tags[] = {
        MessageTag::ProtocolHello, MessageTag::BasisReveal,  MessageTag::SiftIndices, MessageTag::SampleRequest,
        MessageTag::SampleDisclosure, MessageTag::QberReport, MessageTag::Abort,     MessageTag::PaParams,
        MessageTag::Ciphertext,    MessageTag::Reconcile,    MessageTag::Reconcile,   MessageTag::Reconcile,
        MessageTag::Reconcile,     MessageTag::Reconcile,
    };
    static_assert(std::size(tags) == std::variant_size_v<ClassicalMessage>);
    return tags[msg.index()];
}

std::string_view message_name(const ClassicalMessage& msg) {
    static constexpr std::string_view names[] = {
        "ProtocolHello", "BasisReveal", "SiftIndices",    "SampleRequest", "SampleDisclosure",
        "QberReport",    "Abort",       "PaParams",       "Ciphertext",    "ReconcileStart",
        "ParityQuery",   "ParityReply", "VerifyRequest",  "VerifyReply",
    };
    static_assert(std::size(names) == std::variant_size_v<ClassicalMessage>);
    return names[msg.index()];
}

std::uint32_t declared_payload_length(std::span<const std::uint8_t, kFrameHeaderSize> header) {
    return (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
           (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
}

std::vector<std::uint8_t> encode_frame(const ClassicalMessage& msg) {
    ByteWriter w;
    std::visit([&w](const auto& m) { encode_payload(w, m); }, msg);
    return with_header(tag_of(msg), w.take());
}

ClassicalMessage decode_frame(std::span<const std::uint8_t> frame) {
    auto [tag, payload] = split_frame(frame);
    ByteReader r(payload);
    auto msg = decode_payload(tag, r);
    r.expect_end();
    return msg;
}

std::vector<std::uint8_t> encode_pulse_frame(std::span<const Pulse> pulses) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(pulses.size()));
    w.f64(pulses.empty() ? 1.0 : pulses.front().mean_photon_number);
    for (const auto& pulse : pulses) {
        if (pulse.photons.size() > 0xFF) throw FramingError("pulse carries more than 255 photons");
        w.u32(pulse.seq);
        w.u8(static_cast<std::uint8_t>(pulse.photons.size()));
        for (const auto& photon : pulse.photons) w.u8(static_cast<std::uint8_t>(photon.polarization()));
    }
    return with_header(MessageTag::PulseBatch, w.take());
}

std::vector<Pulse> decode_pulse_frame(std::span<const std::uint8_t> frame) {
    auto [tag, payload] = split_frame(frame);
    if (tag != MessageTag::PulseBatch) throw ProtocolError("expected a pulse batch frame");
    ByteReader r(payload);
    std::size_t count = r.u32();
    double mu = r.f64();
    if (count > r.remaining() / 5) throw FramingError("pulse count longer than payload");
    std::vector<Pulse> pulses(count);
    for (auto& pulse : pulses) {
        pulse.seq = r.u32();
        pulse.mean_photon_number = mu;
        auto photons = r.u8();
        pulse.photons.reserve(photons);
        for (int i = 0; i < photons; ++i) {
            auto code = r.u8();
            if (code > 3) throw FramingError("bad polarization code");
            pulse.photons.emplace_back(static_cast<Polarization>(code));
        }
    }
    r.expect_end();
    return pulses;
}

}  // namespace qkd

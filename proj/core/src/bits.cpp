#include "qkd/bits.hpp"

#include <algorithm>
#include <stdexcept>

namespace qkd {

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return out;
}

Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count) {
    if (bytes.size() * 8 < count) throw std::out_of_range("unpack_bits: not enough bytes");
    Bits out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return out;
}

std::uint8_t parity(std::span<const std::uint8_t> bits) {
    std::uint8_t p = 0;
    for (auto b : bits) p ^= b;
    return p & 1u;
}

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return d;
}

Bits select_bits(std::span<const std::uint8_t> bits, std::span<const std::uint32_t> indices) {
    Bits out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(bits[i]);
    return out;
}

Bits remove_bits(std::span<const std::uint8_t> bits, std::span<const std::uint32_t> sorted_indices) {
    Bits out;
    out.reserve(bits.size() - std::min(bits.size(), sorted_indices.size()));
    std::size_t next = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (next < sorted_indices.size() && sorted_indices[next] == i) {
            ++next;
            continue;
        }
        out.push_back(bits[i]);
    }
    return out;
}

Bits random_bits(RandomStream& rng, std::size_t count) {
    Bits out(count);
    for (auto& b : out) b = rng.bit() ? 1 : 0;
    return out;
}

void secure_clear(Bits& bits) {
    volatile std::uint8_t* p = bits.data();
    for (std::size_t i = 0; i < bits.size(); ++i) p[i] = 0;
    bits.clear();
}

}  // namespace qkd

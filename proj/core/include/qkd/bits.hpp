#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

/// A bit string, one element per bit, each element 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Packs bits most-significant-bit first; the final byte is zero padded.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);
Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count);

std::uint8_t parity(std::span<const std::uint8_t> bits);
std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Elements of `bits` at `indices`, in index order.
Bits select_bits(std::span<const std::uint8_t> bits, std::span<const std::uint32_t> indices);
/// `bits` with the positions in `sorted_indices` removed. Indices must be strictly increasing.
Bits remove_bits(std::span<const std::uint8_t> bits, std::span<const std::uint32_t> sorted_indices);

Bits random_bits(RandomStream& rng, std::size_t count);

/// Overwrites the contents with zeros before release.
void secure_clear(Bits& bits);

}  // namespace qkd

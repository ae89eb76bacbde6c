#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/wire.hpp"

namespace qkd {

/// Distilled key bits plus the position up to which they have been used.
/// Bits are consumed strictly in order and never handed out twice.
class KeyLedger {
public:
    explicit KeyLedger(Bits final_key);
    ~KeyLedger();
    KeyLedger(KeyLedger&&) noexcept = default;
    KeyLedger& operator=(KeyLedger&&) noexcept = default;
    KeyLedger(const KeyLedger&) = delete;
    KeyLedger& operator=(const KeyLedger&) = delete;

    std::size_t size() const { return key_.size(); }
    std::size_t consumed_upto() const { return consumed_; }
    std::size_t remaining() const { return key_.size() - consumed_; }

    /// Hands out the next `count` bits; throws KeyExhausted.
    Bits take(std::size_t count);

private:
    Bits key_;
    std::size_t consumed_ = 0;
};

/// One-time pad: plaintext XOR the next 8*len key bits, each byte taking its
/// key bits most-significant first. The ciphertext carries its key offset.
Ciphertext encrypt(std::span<const std::uint8_t> plaintext, KeyLedger& ledger);

/// Throws DesyncError when ciphertext.key_offset differs from the ledger
/// position, KeyExhausted when too few bits remain.
std::vector<std::uint8_t> decrypt(const Ciphertext& ciphertext, KeyLedger& ledger);

}  // namespace qkd

#include "qkd/otp.hpp"

#include <string>

#include "qkd/errors.hpp"

namespace qkd {
namespace {

std::vector<std::uint8_t> xor_with_key(std::span<const std::uint8_t> data, const Bits& key_bits) {
    auto pad = pack_bits(key_bits);
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i] ^ pad[i];
    return out;
}

}  // namespace

KeyLedger::KeyLedger(Bits final_key) : key_(std::move(final_key)) {}

KeyLedger::~KeyLedger() { secure_clear(key_); }

Bits KeyLedger::take(std::size_t count) {
    if (count > remaining()) {
        throw KeyExhausted("need " + std::to_string(count) + " key bits, " + std::to_string(remaining()) +
                           " remain; run another key-distribution session");
    }
    Bits out(key_.begin() + static_cast<std::ptrdiff_t>(consumed_),
             key_.begin() + static_cast<std::ptrdiff_t>(consumed_ + count));
    consumed_ += count;
    return out;
}

Ciphertext encrypt(std::span<const std::uint8_t> plaintext, KeyLedger& ledger) {
    Ciphertext ct;
    ct.key_offset = static_cast<std::uint32_t>(ledger.consumed_upto());
    auto key_bits = ledger.take(8 * plaintext.size());
    ct.bytes = xor_with_key(plaintext, key_bits);
    secure_clear(key_bits);
    return ct;
}

std::vector<std::uint8_t> decrypt(const Ciphertext& ciphertext, KeyLedger& ledger) {
    if (ciphertext.key_offset != ledger.consumed_upto()) {
        throw DesyncError("ciphertext starts at key bit " + std::to_string(ciphertext.key_offset) +
                          " but the ledger is at " + std::to_string(ledger.consumed_upto()));
    }
    auto key_bits = ledger.take(8 * ciphertext.bytes.size());
    auto plain = xor_with_key(ciphertext.bytes, key_bits);
    secure_clear(key_bits);
    return plain;
}

}  // namespace qkd

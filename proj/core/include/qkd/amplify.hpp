#pragma once

#include <cstddef>
#include <cstdint>

#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/wire.hpp"

namespace qkd {

inline constexpr std::uint32_t kDefaultSecurityParam = 32;
/// Bits of Eve knowledge assumed per observed error, scaled by the 4x ratio of
/// intercepted positions to errors. Deliberately above the true intercept-resend
/// rate (Eve is certain of half the intercepted sifted positions).
inline constexpr double kInterceptInfoPerError = 2.0;

enum class KeyStage : std::uint8_t { Raw, Sifted, Reconciled, Final };

struct KeyMaterial {
    KeyStage stage = KeyStage::Raw;
    Bits bits;
    std::size_t leaked_bits = 0;
    std::size_t eve_known_bound = 0;

    std::size_t length() const { return bits.size(); }
};

using PaParamsData = PaParams;

/// max(0, p - leaked - eve_known - security_param).
std::size_t pa_output_length(std::size_t p, std::size_t leaked_bits, std::size_t eve_known_bound,
                             std::size_t security_param);

/// Length a Toeplitz seed must have: p + out_len - 1 (0 when either is 0).
std::size_t toeplitz_seed_length(std::size_t p, std::size_t out_len);

/// Toeplitz hash over GF(2): out[i] = sum_j seed[i - j + p - 1] * key[j].
/// Throws ParameterError when the seed length is wrong.
Bits privacy_amplify(const Bits& key, const PaParamsData& params);

/// Expected sifted positions carried by multi-photon pulses (0 for a single-photon source).
std::size_t beam_split_bound(const SourceConfig& source, std::size_t sifted_len);

/// l = ceil(n * min(1, 4 * qber * kInterceptInfoPerError)) + beam_split_bound, capped at n.
std::size_t estimate_eve_knowledge(double qber, const SourceConfig& source, std::size_t sifted_len);

}  // namespace qkd

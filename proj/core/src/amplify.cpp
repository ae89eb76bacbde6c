#include "qkd/amplify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qkd/errors.hpp"

namespace qkd {
namespace {

// Little-endian bit order within 64-bit words: bit b lives in word b/64 at position b%64.
std::vector<std::uint64_t> to_words(const Bits& bits, std::size_t extra_words) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64 + extra_words, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    return words;
}

std::uint64_t window(const std::vector<std::uint64_t>& words, std::size_t offset) {
    std::size_t w = offset / 64;
    unsigned shift = offset % 64;
    if (shift == 0) return words[w];
    return (words[w] >> shift) | (words[w + 1] << (64 - shift));
}

}  // namespace

std::size_t pa_output_length(std::size_t p, std::size_t leaked_bits, std::size_t eve_known_bound,
                             std::size_t security_param) {
    std::size_t spent = leaked_bits + eve_known_bound + security_param;
    return p > spent ? p - spent : 0;
}

std::size_t toeplitz_seed_length(std::size_t p, std::size_t out_len) {
    return (p == 0 || out_len == 0) ? 0 : p + out_len - 1;
}

Bits privacy_amplify(const Bits& key, const PaParamsData& params) {
    const std::size_t p = key.size();
    const std::size_t out_len = params.out_len;
    const std::size_t expected = toeplitz_seed_length(p, out_len);
    if (params.toeplitz_seed.size() != expected) {
        throw ParameterError("toeplitz seed has " + std::to_string(params.toeplitz_seed.size()) +
                             " bits, expected " + std::to_string(expected));
    }
    if (out_len == 0) return {};

    // With the key reversed, out[i] is the parity of seed[i .. i+p) AND key_rev:
    // T[i][j] = seed[i - j + p - 1] and t = p - 1 - j gives seed[i + t] * key[p - 1 - t].
    Bits reversed(key.rbegin(), key.rend());
    const auto key_words = to_words(reversed, 0);
    const auto seed_words = to_words(params.toeplitz_seed, 2);

    Bits out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < key_words.size(); ++w) acc ^= window(seed_words, i + 64 * w) & key_words[w];
        out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
}

std::size_t beam_split_bound(const SourceConfig& source, std::size_t sifted_len) {
    if (source.kind == SourceKind::SinglePhoton) return 0;
    const double mu = source.mean_photon_number;
    const double nonempty = 1.0 - std::exp(-mu);
    if (nonempty <= 0.0) return 0;
    const double multi = 1.0 - std::exp(-mu) * (1.0 + mu);
    return static_cast<std::size_t>(std::ceil(static_cast<double>(sifted_len) * multi / nonempty));
}

std::size_t estimate_eve_knowledge(double qber, const SourceConfig& source, std::size_t sifted_len) {
    const double fraction = std::min(1.0, 4.0 * qber * kInterceptInfoPerError);
    auto intercept = static_cast<std::size_t>(std::ceil(static_cast<double>(sifted_len) * fraction));
    return std::min(sifted_len, intercept + beam_split_bound(source, sifted_len));
}

}  // namespace qkd

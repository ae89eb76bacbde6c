#pragma once

#include <cstdint>
#include <vector>

#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

namespace qkd {

class Eve;

/// What travels on the quantum channel: zero or more photons prepared identically.
struct Pulse {
    std::uint32_t seq = 0;
    std::vector<Photon> photons;
    double mean_photon_number = 1.0;

    bool empty() const { return photons.empty(); }
    bool operator==(const Pulse&) const = default;
};

struct QuantumChannelConfig {
    double loss_probability = 0.0;
    double noise_probability = 0.0;
    Eve* eve_tap = nullptr;  // non-owning
};

enum class SourceKind : std::uint8_t { SinglePhoton, Poisson };

struct SourceConfig {
    SourceKind kind = SourceKind::SinglePhoton;
    double mean_photon_number = 1.0;

    bool operator==(const SourceConfig&) const = default;
};

/// Photon count for the next pulse: always 1 for a single-photon source.
std::uint32_t draw_photon_count(const SourceConfig& source, RandomStream& rng);

/// A pulse of `count` photons all encoding `bit` in `basis`.
Pulse prepare_pulse(std::uint32_t seq, std::uint8_t bit, Basis basis, std::uint32_t count,
                    double mean_photon_number);

/// Applies, in order: the Eve tap (if any), per-photon loss, per-photon
/// depolarizing noise (replacement by a uniformly random angle). Loss and noise
/// draw from `rng`; Eve draws from her own stream. `pairs` is consulted for
/// entangled photons.
Pulse transmit_pulse(Pulse pulse, const QuantumChannelConfig& cfg, RandomStream& rng,
                     PairRegistry* pairs = nullptr);

}  // namespace qkd

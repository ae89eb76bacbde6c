#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"
#include "qkd/transport.hpp"

namespace qkd {

enum class EveKind : std::uint8_t { None, InterceptResend, BeamSplit };
enum class BasisPolicy : std::uint8_t { RandomBasis, FixedRectilinear, FixedDiagonal };
enum class Confidence : std::uint8_t { Certain, Guess };

struct EveConfig {
    EveKind kind = EveKind::None;
    double intercept_fraction = 1.0;
    BasisPolicy basis_policy = BasisPolicy::RandomBasis;

    bool operator==(const EveConfig&) const = default;
};

struct EveRecord {
    std::uint32_t seq = 0;
    Basis basis_guess = Basis::Rectilinear;
    std::uint8_t bit_guess = 0;
    Confidence confidence = Confidence::Guess;

    bool operator==(const EveRecord&) const = default;
};

struct EveKnowledge {
    std::vector<EveRecord> records;
    /// Sifted positions whose bit Eve knows with certainty.
    std::size_t bits_known_of_sifted_key = 0;
};

/// Photons diverted by the beam splitter, keyed by pulse sequence number.
using PhotonStore = std::map<std::uint32_t, std::vector<Photon>>;

/// Sender's basis for a sifted position, as deducible from the public transcript.
struct RevealedBasis {
    std::uint32_t seq = 0;
    Basis basis = Basis::Rectilinear;
};

/// With probability `fraction` measures every photon of the pulse in a basis
/// chosen by `policy` and forwards a fresh pulse (same photon count) carrying
/// the measured bit in that basis. Always consumes one draw for the decision.
std::pair<Pulse, std::optional<EveRecord>> intercept_resend(Pulse pulse, BasisPolicy policy,
                                                            double fraction, RandomStream& rng,
                                                            PairRegistry* pairs = nullptr);

/// 50/50 beam splitter: each photon independently goes to Eve with probability 1/2.
std::pair<Pulse, std::vector<Photon>> beam_split(Pulse pulse, RandomStream& rng);

/// Measures stored photons at revealed positions in the sender's basis. Only
/// revealed (sifted) positions count towards bits_known_of_sifted_key.
EveKnowledge delayed_measure_store(const PhotonStore& store, std::span<const RevealedBasis> revealed,
                                   RandomStream& rng, PairRegistry* pairs = nullptr);

/// Sender-basis information Eve can read off a transcript: BasisReveal followed
/// by SiftIndices (BB84/E91). Empty for B92, which never discloses bases.
std::vector<RevealedBasis> revealed_bases(const Transcript& transcript);

/// An eavesdropper bound to one quantum channel. Reads the classical
/// transcript but holds no transport, so she never writes to it.
class Eve {
public:
    Eve(EveConfig config, RandomStream rng);

    const EveConfig& config() const { return config_; }

    /// Tap point called by transmit_pulse before loss and noise.
    Pulse tap(Pulse pulse, PairRegistry* pairs);

    /// Knowledge after the public discussion in `transcript` has taken place.
    EveKnowledge conclude(const Transcript& transcript, PairRegistry* pairs);

    const std::vector<EveRecord>& intercept_records() const { return records_; }
    const PhotonStore& store() const { return store_; }

private:
    EveConfig config_;
    RandomStream rng_;
    std::vector<EveRecord> records_;
    PhotonStore store_;
};

}  // namespace qkd

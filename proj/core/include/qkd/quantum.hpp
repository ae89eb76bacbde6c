#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>

#include "qkd/rng.hpp"

namespace qkd {

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// The four polarization angles. Enumerator values are the wire codes.
enum class Polarization : std::uint8_t { Deg0 = 0, Deg45 = 1, Deg90 = 2, Deg135 = 3 };

constexpr Basis conjugate(Basis b) {
    return b == Basis::Rectilinear ? Basis::Diagonal : Basis::Rectilinear;
}

constexpr Basis basis_of(Polarization p) {
    return (p == Polarization::Deg0 || p == Polarization::Deg90) ? Basis::Rectilinear
                                                                 : Basis::Diagonal;
}

constexpr int angle_degrees(Polarization p) { return 45 * static_cast<int>(p); }

/// Rectilinear: 0 -> 0deg, 1 -> 90deg. Diagonal: 0 -> 45deg, 1 -> 135deg.
constexpr Polarization polarization_for(std::uint8_t bit, Basis basis) {
    if (basis == Basis::Rectilinear) return bit ? Polarization::Deg90 : Polarization::Deg0;
    return bit ? Polarization::Deg135 : Polarization::Deg45;
}

/// Inverse of polarization_for within the polarization's own basis.
constexpr std::uint8_t bit_of(Polarization p) {
    return (p == Polarization::Deg90 || p == Polarization::Deg135) ? 1 : 0;
}

std::string_view to_string(Basis b);

enum class PairSide : std::uint8_t { A = 0, B = 1 };

struct EntangledRef {
    std::uint32_t pair_id = 0;
    PairSide side = PairSide::A;

    bool operator==(const EntangledRef&) const = default;
};

/// A single light quantum: either definitely polarized, or one half of an
/// entangled pair whose outcome lives in a PairRegistry until measured.
class Photon {
public:
    explicit Photon(Polarization p) : state_(p) {}
    explicit Photon(EntangledRef ref) : state_(ref) {}

    bool entangled() const { return std::holds_alternative<EntangledRef>(state_); }
    /// Throws std::logic_error for an unresolved entangled photon.
    Polarization polarization() const;
    const EntangledRef& pair() const;

    void set_polarization(Polarization p) { state_ = p; }

    bool operator==(const Photon&) const = default;

private:
    std::variant<Polarization, EntangledRef> state_;
};

struct MeasurementOutcome {
    std::uint8_t bit = 0;
    Basis basis_used = Basis::Rectilinear;
    Polarization post_state = Polarization::Deg0;

    bool operator==(const MeasurementOutcome&) const = default;
};

Photon encode(std::uint8_t bit, Basis basis);

/// Session-scoped store of lazily resolved entangled pairs. The first
/// measurement of either side fixes one definite polarization for both.
class PairRegistry {
public:
    /// Throws std::logic_error if pair_id was already issued.
    std::pair<Photon, Photon> make_pair(std::uint32_t pair_id);

    bool contains(std::uint32_t pair_id) const { return pairs_.count(pair_id) != 0; }
    std::optional<Polarization> resolved(std::uint32_t pair_id) const;

    /// Replaces an entangled photon by its pair's definite polarization,
    /// drawing the pair outcome in `basis` if still unresolved.
    void collapse(Photon& photon, Basis basis, RandomStream& rng);

    /// Replaces an entangled photon by its pair's polarization if the pair is
    /// resolved. Returns false (photon untouched) if it is not.
    bool try_resolve(Photon& photon) const;

private:
    std::unordered_map<std::uint32_t, std::optional<Polarization>> pairs_;
};

/// Projective measurement. Matching basis: deterministic, no draws.
/// Conjugate basis: uniform bit, exactly one draw, photon projected.
/// Entangled photons need `pairs`; an unresolved pair costs one draw to resolve
/// and then measures deterministically. The photon holds post_state afterwards.
MeasurementOutcome measure(Photon& photon, Basis basis, RandomStream& rng,
                           PairRegistry* pairs = nullptr);

}  // namespace qkd

#include "qkd/quantum.hpp"

#include <stdexcept>
#include <string>

namespace qkd {

std::string_view to_string(Basis b) {
    return b == Basis::Rectilinear ? "rectilinear" : "diagonal";
}

Polarization Photon::polarization() const {
    if (const auto* p = std::get_if<Polarization>(&state_)) return *p;
    throw std::logic_error("photon is part of an unresolved entangled pair");
}

const EntangledRef& Photon::pair() const {
    if (const auto* r = std::get_if<EntangledRef>(&state_)) return *r;
    throw std::logic_error("photon is not entangled");
}

Photon encode(std::uint8_t bit, Basis basis) { return Photon(polarization_for(bit & 1u, basis)); }

std::pair<Photon, Photon> PairRegistry::make_pair(std::uint32_t pair_id) {
    auto [it, inserted] = pairs_.emplace(pair_id, std::nullopt);
    if (!inserted) throw std::logic_error("entangled pair id reused: " + std::to_string(pair_id));
    return {Photon(EntangledRef{pair_id, PairSide::A}), Photon(EntangledRef{pair_id, PairSide::B})};
}

std::optional<Polarization> PairRegistry::resolved(std::uint32_t pair_id) const {
    auto it = pairs_.find(pair_id);
    if (it == pairs_.end()) throw std::logic_error("unknown entangled pair " + std::to_string(pair_id));
    return it->second;
}

void PairRegistry::collapse(Photon& photon, Basis basis, RandomStream& rng) {
    if (!photon.entangled()) return;
    auto it = pairs_.find(photon.pair().pair_id);
    if (it == pairs_.end()) {
        throw std::logic_error("unknown entangled pair " + std::to_string(photon.pair().pair_id));
    }
    if (!it->second) it->second = polarization_for(rng.bit() ? 1 : 0, basis);
    photon.set_polarization(*it->second);
}

bool PairRegistry::try_resolve(Photon& photon) const {
    if (!photon.entangled()) return true;
    auto state = resolved(photon.pair().pair_id);
    if (!state) return false;
    photon.set_polarization(*state);
    return true;
}

MeasurementOutcome measure(Photon& photon, Basis basis, RandomStream& rng, PairRegistry* pairs) {
    if (photon.entangled()) {
        if (pairs == nullptr) throw std::logic_error("measuring an entangled photon needs its PairRegistry");
        pairs->collapse(photon, basis, rng);
    }
    Polarization state = photon.polarization();
    if (basis_of(state) != basis) {
        state = polarization_for(rng.bit() ? 1 : 0, basis);
        photon.set_polarization(state);
    }
    return MeasurementOutcome{bit_of(state), basis, state};
}

}  // namespace qkd

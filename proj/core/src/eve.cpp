#include "qkd/eve.hpp"

#include <unordered_map>

namespace qkd {
namespace {

Basis pick_basis(BasisPolicy policy, RandomStream& rng) {
    switch (policy) {
        case BasisPolicy::FixedRectilinear: return Basis::Rectilinear;
        case BasisPolicy::FixedDiagonal: return Basis::Diagonal;
        case BasisPolicy::RandomBasis: break;
    }
    return rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
}

}  // namespace

std::pair<Pulse, std::optional<EveRecord>> intercept_resend(Pulse pulse, BasisPolicy policy, double fraction,
                                                            RandomStream& rng, PairRegistry* pairs) {
    bool intercept = rng.bernoulli(fraction);
    if (!intercept || pulse.photons.empty()) return {std::move(pulse), std::nullopt};

    Basis basis = pick_basis(policy, rng);
    std::optional<std::uint8_t> first_bit;
    for (auto& photon : pulse.photons) {
        auto outcome = measure(photon, basis, rng, pairs);
        if (!first_bit) first_bit = outcome.bit;
    }
    EveRecord record{pulse.seq, basis, *first_bit, Confidence::Guess};
    Pulse fresh = prepare_pulse(pulse.seq, record.bit_guess, basis,
                                static_cast<std::uint32_t>(pulse.photons.size()), pulse.mean_photon_number);
    return {std::move(fresh), record};
}

std::pair<Pulse, std::vector<Photon>> beam_split(Pulse pulse, RandomStream& rng) {
    std::vector<Photon> onward;
    std::vector<Photon> diverted;
    for (auto& photon : pulse.photons) {
        (rng.bit() ? diverted : onward).push_back(photon);
    }
    pulse.photons = std::move(onward);
    return {std::move(pulse), std::move(diverted)};
}

EveKnowledge delayed_measure_store(const PhotonStore& store, std::span<const RevealedBasis> revealed,
                                   RandomStream& rng, PairRegistry* pairs) {
    EveKnowledge knowledge;
    for (const auto& r : revealed) {
        auto it = store.find(r.seq);
        if (it == store.end() || it->second.empty()) continue;
        Photon photon = it->second.front();
        auto outcome = measure(photon, r.basis, rng, pairs);
        knowledge.records.push_back({r.seq, r.basis, outcome.bit, Confidence::Certain});
        ++knowledge.bits_known_of_sifted_key;
    }
    return knowledge;
}

std::vector<RevealedBasis> revealed_bases(const Transcript& transcript) {
    const BasisReveal* reveal = nullptr;
    for (const auto& entry : transcript) {
        if (const auto* b = std::get_if<BasisReveal>(&entry.message)) {
            reveal = b;
        } else if (const auto* s = std::get_if<SiftIndices>(&entry.message); s && reveal) {
            std::vector<RevealedBasis> out;
            out.reserve(s->indices.size());
            for (auto i : s->indices) {
                if (i < reveal->bases.size()) out.push_back({i, reveal->bases[i]});
            }
            return out;
        }
    }
    return {};
}

Eve::Eve(EveConfig config, RandomStream rng) : config_(config), rng_(std::move(rng)) {}

Pulse Eve::tap(Pulse pulse, PairRegistry* pairs) {
    switch (config_.kind) {
        case EveKind::None: return pulse;
        case EveKind::InterceptResend: {
            auto [out, record] =
                intercept_resend(std::move(pulse), config_.basis_policy, config_.intercept_fraction, rng_, pairs);
            if (record) records_.push_back(*record);
            return std::move(out);
        }
        case EveKind::BeamSplit: {
            auto [out, diverted] = beam_split(std::move(pulse), rng_);
            if (!diverted.empty()) {
                auto& slot = store_[out.seq];
                slot.insert(slot.end(), diverted.begin(), diverted.end());
            }
            return std::move(out);
        }
    }
    return pulse;
}

EveKnowledge Eve::conclude(const Transcript& transcript, PairRegistry* pairs) {
    auto revealed = revealed_bases(transcript);
    EveKnowledge knowledge = delayed_measure_store(store_, revealed, rng_, pairs);

    // An intercepted sifted position is known for certain once the revealed
    // basis shows Eve measured in the sender's basis.
    std::unordered_map<std::uint32_t, Basis> sender_basis;
    for (const auto& r : revealed) sender_basis.emplace(r.seq, r.basis);
    for (auto record : records_) {
        auto it = sender_basis.find(record.seq);
        if (it != sender_basis.end() && it->second == record.basis_guess) {
            record.confidence = Confidence::Certain;
            ++knowledge.bits_known_of_sifted_key;
        }
        knowledge.records.push_back(record);
    }
    return knowledge;
}

}  // namespace qkd

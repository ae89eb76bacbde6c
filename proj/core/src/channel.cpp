#include "qkd/channel.hpp"

#include "qkd/eve.hpp"

namespace qkd {

std::uint32_t draw_photon_count(const SourceConfig& source, RandomStream& rng) {
    if (source.kind == SourceKind::SinglePhoton) return 1;
    return rng.poisson(source.mean_photon_number);
}

Pulse prepare_pulse(std::uint32_t seq, std::uint8_t bit, Basis basis, std::uint32_t count,
                    double mean_photon_number) {
    Pulse pulse;
    pulse.seq = seq;
    pulse.mean_photon_number = mean_photon_number;
    pulse.photons.assign(count, encode(bit, basis));
    return pulse;
}

Pulse transmit_pulse(Pulse pulse, const QuantumChannelConfig& cfg, RandomStream& rng,
                     PairRegistry* pairs) {
    if (cfg.eve_tap != nullptr) pulse = cfg.eve_tap->tap(std::move(pulse), pairs);

    std::vector<Photon> survivors;
    survivors.reserve(pulse.photons.size());
    for (auto& photon : pulse.photons) {
        if (!rng.bernoulli(cfg.loss_probability)) survivors.push_back(photon);
    }
    for (auto& photon : survivors) {
        if (rng.bernoulli(cfg.noise_probability)) {
            photon.set_polarization(static_cast<Polarization>(rng.below(4)));
        }
    }
    pulse.photons = std::move(survivors);
    return pulse;
}

}  // namespace qkd

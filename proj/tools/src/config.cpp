#include "qkd_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qkd/errors.hpp"

namespace qkd::cli {
namespace {

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad " + what + ": '" + text + "'");
}

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) throw ConfigError("bad seed: '" + text + "'");
    return v;
}

BasisPolicy parse_basis_policy(const std::string& text) {
    if (text == "random") return BasisPolicy::RandomBasis;
    if (text == "rect" || text == "rectilinear") return BasisPolicy::FixedRectilinear;
    if (text == "diag" || text == "diagonal") return BasisPolicy::FixedDiagonal;
    throw ConfigError("unknown eve basis policy '" + text + "' (random|rect|diag)");
}

std::string_view basis_policy_name(BasisPolicy p) {
    switch (p) {
        case BasisPolicy::RandomBasis: return "random";
        case BasisPolicy::FixedRectilinear: return "rect";
        case BasisPolicy::FixedDiagonal: return "diag";
    }
    return "random";
}

EveKind parse_eve_kind(const std::string& text) {
    if (text == "none") return EveKind::None;
    if (text == "intercept") return EveKind::InterceptResend;
    if (text == "beamsplit") return EveKind::BeamSplit;
    throw ConfigError("unknown eve kind '" + text + "' (none|intercept|beamsplit)");
}

std::string_view eve_kind_name(EveKind k) {
    switch (k) {
        case EveKind::None: return "none";
        case EveKind::InterceptResend: return "intercept";
        case EveKind::BeamSplit: return "beamsplit";
    }
    return "none";
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) parts.push_back(part);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::uint32_t get_count(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 0xFFFFFFFFll)
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

}  // namespace

ProtocolId parse_protocol(const std::string& text) {
    if (text == "bb84") return ProtocolId::BB84;
    if (text == "b92") return ProtocolId::B92;
    if (text == "e91") return ProtocolId::E91;
    throw ConfigError("unknown protocol '" + text + "' (bb84|b92|e91)");
}

EveConfig parse_eve(const std::string& text) {
    auto parts = split(text, ':');
    if (parts.empty()) throw ConfigError("empty eve setting");
    EveConfig eve;
    eve.kind = parse_eve_kind(parts[0]);
    if (eve.kind == EveKind::InterceptResend) {
        if (parts.size() > 3) throw ConfigError("bad eve setting '" + text + "'");
        if (parts.size() >= 2) eve.intercept_fraction = parse_double(parts[1], "intercept fraction");
        if (parts.size() == 3) eve.basis_policy = parse_basis_policy(parts[2]);
    } else if (parts.size() != 1) {
        throw ConfigError("bad eve setting '" + text + "'");
    }
    return eve;
}

SourceConfig parse_source(const std::string& text) {
    if (text == "single") return {};
    auto parts = split(text, ':');
    if (parts.size() == 2 && parts[0] == "poisson") {
        return {SourceKind::Poisson, parse_double(parts[1], "mean photon number")};
    }
    throw ConfigError("bad source setting '" + text + "' (single|poisson:MU)");
}

std::string format_eve(const EveConfig& eve) {
    if (eve.kind != EveKind::InterceptResend) return std::string(eve_kind_name(eve.kind));
    std::ostringstream out;
    out << "intercept:" << eve.intercept_fraction << ':' << basis_policy_name(eve.basis_policy);
    return out.str();
}

std::string format_source(const SourceConfig& source) {
    if (source.kind == SourceKind::SinglePhoton) return "single";
    std::ostringstream out;
    out << "poisson:" << source.mean_photon_number;
    return out.str();
}

SessionConfig apply_json(SessionConfig c, const nlohmann::json& flat) {
    if (!flat.is_object()) throw ConfigError("config must be a JSON object of dotted keys");
    for (const auto& [key, v] : flat.items()) {
        if (key == "protocol") c.protocol = parse_protocol(get_as<std::string>(v, key));
        else if (key == "n_pulses") c.n_pulses = get_count(v, key);
        else if (key == "sample_fraction") c.sample_fraction = get_as<double>(v, key);
        else if (key == "qber_abort_threshold") c.qber_abort_threshold = get_as<double>(v, key);
        else if (key == "channel.loss") c.channel.loss_probability = get_as<double>(v, key);
        else if (key == "channel.noise") c.channel.noise_probability = get_as<double>(v, key);
        else if (key == "eve.kind") c.eve.kind = parse_eve_kind(get_as<std::string>(v, key));
        else if (key == "eve.fraction") c.eve.intercept_fraction = get_as<double>(v, key);
        else if (key == "eve.basis") c.eve.basis_policy = parse_basis_policy(get_as<std::string>(v, key));
        else if (key == "source.kind") {
            auto kind = get_as<std::string>(v, key);
            if (kind == "single") c.source.kind = SourceKind::SinglePhoton;
            else if (kind == "poisson") c.source.kind = SourceKind::Poisson;
            else throw ConfigError("unknown source kind '" + kind + "' (single|poisson)");
        } else if (key == "source.mu") c.source.mean_photon_number = get_as<double>(v, key);
        else if (key == "reconcile.rounds") c.reconcile_rounds = get_count(v, key);
        else if (key == "security_param") c.security_param = get_count(v, key);
        else if (key == "seed") {
            if (v.is_number_unsigned()) c.seed = v.get<std::uint64_t>();
            else if (v.is_string()) c.seed = parse_seed(v.get<std::string>());
            else throw ConfigError("config key 'seed' must be a non-negative integer");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return c;
}

nlohmann::json to_json(const SessionConfig& c) {
    return {
        {"protocol", std::string(to_string(c.protocol))},
        {"n_pulses", c.n_pulses},
        {"sample_fraction", c.sample_fraction},
        {"qber_abort_threshold", c.qber_abort_threshold},
        {"channel.loss", c.channel.loss_probability},
        {"channel.noise", c.channel.noise_probability},
        {"eve.kind", std::string(eve_kind_name(c.eve.kind))},
        {"eve.fraction", c.eve.intercept_fraction},
        {"eve.basis", std::string(basis_policy_name(c.eve.basis_policy))},
        {"source.kind", c.source.kind == SourceKind::Poisson ? "poisson" : "single"},
        {"source.mu", c.source.mean_photon_number},
        {"reconcile.rounds", c.reconcile_rounds},
        {"security_param", c.security_param},
        {"seed", c.seed},
    };
}

SessionConfig resolve(const std::optional<std::filesystem::path>& config_file, const Overrides& flags,
                      const char* env_seed) {
    SessionConfig c;
    bool seed_from_file = false;
    if (config_file) {
        std::ifstream in(*config_file);
        if (!in) throw ConfigError("cannot open config file " + config_file->string());
        nlohmann::json flat;
        try {
            flat = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file " + config_file->string() + ": " + e.what());
        }
        c = apply_json(c, flat);
        seed_from_file = flat.is_object() && flat.contains("seed");
    }
    if (!seed_from_file && env_seed != nullptr && *env_seed != '\0') c.seed = parse_seed(env_seed);

    if (flags.protocol) c.protocol = parse_protocol(*flags.protocol);
    if (flags.pulses) c.n_pulses = *flags.pulses;
    if (flags.eve) c.eve = parse_eve(*flags.eve);
    if (flags.noise) c.channel.noise_probability = *flags.noise;
    if (flags.loss) c.channel.loss_probability = *flags.loss;
    if (flags.source) c.source = parse_source(*flags.source);
    if (flags.sample_fraction) c.sample_fraction = *flags.sample_fraction;
    if (flags.qber_threshold) c.qber_abort_threshold = *flags.qber_threshold;
    if (flags.seed) c.seed = *flags.seed;

    validate(c);
    return c;
}

void set_parameter(SessionConfig& c, const std::string& name, double value) {
    if (name == "eve.fraction" || name == "fraction") {
        c.eve.kind = EveKind::InterceptResend;
        c.eve.intercept_fraction = value;
    } else if (name == "channel.noise" || name == "noise") {
        c.channel.noise_probability = value;
    } else if (name == "channel.loss" || name == "loss") {
        c.channel.loss_probability = value;
    } else if (name == "source.mu" || name == "mu") {
        c.source = {SourceKind::Poisson, value};
    } else if (name == "n_pulses" || name == "pulses") {
        if (value < 1 || value > 0xFFFFFFFFu || value != static_cast<double>(static_cast<std::uint64_t>(value)))
            throw ConfigError("pulse count must be a positive integer");
        c.n_pulses = static_cast<std::uint32_t>(value);
    } else {
        throw ConfigError("parameter '" + name + "' is not sweepable (eve.fraction|channel.noise|channel.loss|source.mu|n_pulses)");
    }
}

}  // namespace qkd::cli

#include "qkd_cli/commands.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

#include "qkd/errors.hpp"
#include "qkd/otp.hpp"
#include "qkd/session.hpp"
#include "qkd_cli/config.hpp"
#include "qkd_cli/report.hpp"

namespace qkd::cli {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xF];
    }
    return out;
}

nlohmann::json otp_demo(const SessionOutcome& outcome, const std::string& message) {
    std::vector<std::uint8_t> plaintext(message.begin(), message.end());
    KeyLedger sender(outcome.sender.final_key.bits);
    KeyLedger receiver(outcome.receiver.final_key.bits);
    nlohmann::json section{{"plaintext_bytes", plaintext.size()}, {"key_bits", sender.size()}};
    try {
        auto ct = encrypt(plaintext, sender);
        auto back = decrypt(ct, receiver);
        section["status"] = "delivered";
        section["key_offset"] = ct.key_offset;
        section["ciphertext_hex"] = hex(ct.bytes);
        section["roundtrip_ok"] = back == plaintext;
        section["key_bits_remaining"] = receiver.remaining();
    } catch (const KeyExhausted&) {
        section["status"] = "key_exhausted";
    }
    return section;
}

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

nlohmann::json run(const SessionConfig& config, const std::optional<std::string>& message) {
    const auto start = Clock::now();
    auto outcome = run_session(config);
    const double wall = elapsed_ms(start);
    auto report = session_report(config, outcome, wall);
    if (message) report["otp"] = otp_demo(outcome, *message);
    outcome.sender.zeroize();
    outcome.receiver.zeroize();
    return report;
}

std::string sweep(const SessionConfig& base, const std::string& parameter, const std::vector<double>& values,
                  unsigned repeats) {
    // Reject unknown parameters before running anything.
    {
        SessionConfig probe = base;
        set_parameter(probe, parameter, values.empty() ? 0.0 : values.front());
    }
    std::ostringstream out;
    out << "parameter,value,repeat,seed,status,qber,sifted_error_rate,sift_ratio,sifted,final_length\n";
    for (double value : values) {
        for (unsigned r = 0; r < repeats; ++r) {
            SessionConfig c = base;
            set_parameter(c, parameter, value);
            c.seed = base.seed + r;
            validate(c);
            auto outcome = run_session(c);
            auto report = session_report(c, outcome, 0.0);
            out << parameter << ',' << num(value) << ',' << r << ',' << c.seed << ','
                << report["status"].get<std::string>() << ',' << num(report["qber"].get<double>()) << ','
                << num(report["sifted_error_rate"].get<double>()) << ','
                << num(report["sift_ratio"].get<double>()) << ',' << report["counts"]["sifted"].dump() << ','
                << report["counts"]["final"].dump() << '\n';
            outcome.sender.zeroize();
            outcome.receiver.zeroize();
        }
    }
    return out.str();
}

nlohmann::json serve(const SessionConfig& config, const ServeOptions& options) {
    if (options.listen.has_value() == options.connect.has_value())
        throw ConfigError("serve needs exactly one of --listen or --connect");

    std::unique_ptr<FdTransport> transport;
    if (options.listen) {
        TcpListener listener(*options.listen);
        std::cerr << "listening on " << options.listen->host << ':' << listener.port() << std::endl;
        transport = listener.accept();
    } else {
        transport = tcp_connect(*options.connect, options.connect_timeout);
    }

    const auto start = Clock::now();
    auto party = options.role == Role::Sender ? run_sender(config, *transport) : run_receiver(config, *transport);
    auto report = party_report(config, party, elapsed_ms(start));
    party.zeroize();
    return report;
}

}  // namespace qkd::cli

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkd/errors.hpp"
#include "qkd_cli/commands.hpp"
#include "qkd_cli/config.hpp"
#include "qkd_cli/report.hpp"

namespace {

struct Common {
    qkd::cli::Overrides flags;
    std::optional<std::filesystem::path> config;
    std::string out = "json";
};

void add_common(CLI::App& cmd, Common& c) {
    cmd.add_option("--config", c.config, "JSON config file of dotted keys")->check(CLI::ExistingFile);
    cmd.add_option("--protocol", c.flags.protocol, "bb84 | b92 | e91");
    cmd.add_option("--pulses", c.flags.pulses, "Number of pulses (or entangled pairs)");
    cmd.add_option("--eve", c.flags.eve, "none | intercept:F[:random|rect|diag] | beamsplit");
    cmd.add_option("--noise", c.flags.noise, "Per-photon depolarizing probability");
    cmd.add_option("--loss", c.flags.loss, "Per-photon loss probability");
    cmd.add_option("--source", c.flags.source, "single | poisson:MU");
    cmd.add_option("--sample-frac", c.flags.sample_fraction, "Fraction of sifted bits disclosed for QBER");
    cmd.add_option("--qber-threshold", c.flags.qber_threshold, "Abort when the measured QBER exceeds this");
    cmd.add_option("--seed", c.flags.seed, "Master seed (falls back to QKD_SEED)");
}

qkd::SessionConfig resolve(const Common& c) {
    return qkd::cli::resolve(c.config, c.flags, std::getenv("QKD_SEED"));
}

void emit(const nlohmann::json& report, const std::string& format) {
    if (format == "csv") std::cout << qkd::cli::report_csv(report);
    else std::cout << report.dump(2) << '\n';
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw qkd::ConfigError("bad sweep value '" + item + "'");
        values.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum key distribution simulator"};
    app.require_subcommand(1);

    Common run_opts;
    std::optional<std::string> message;
    auto* run = app.add_subcommand("run", "Run one session with both parties in-process");
    add_common(*run, run_opts);
    run->add_option("--out", run_opts.out, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--message", message, "One-time-pad this text with the distilled key");

    Common sweep_opts;
    std::string parameter;
    std::string values_text;
    unsigned repeats = 1;
    auto* sweep = app.add_subcommand("sweep", "Repeat sessions over a parameter grid, CSV to stdout");
    add_common(*sweep, sweep_opts);
    sweep->add_option("--param", parameter, "eve.fraction | channel.noise | channel.loss | source.mu | n_pulses")
        ->required();
    sweep->add_option("--values", values_text, "Comma-separated values")->required();
    sweep->add_option("--repeats", repeats, "Seeds per value (seed, seed+1, ...)")->check(CLI::PositiveNumber);

    Common serve_opts;
    std::string role;
    std::optional<std::string> listen, connect;
    unsigned timeout_ms = 5000;
    auto* serve = app.add_subcommand("serve", "Run one party over TCP");
    add_common(*serve, serve_opts);
    serve->add_option("--role", role, "sender | receiver")->required()->check(CLI::IsMember({"sender", "receiver"}));
    auto* listen_opt = serve->add_option("--listen", listen, "ADDR:PORT to accept the peer on");
    serve->add_option("--connect", connect, "ADDR:PORT of the listening peer")->excludes(listen_opt);
    serve->add_option("--connect-timeout", timeout_ms, "Milliseconds to keep retrying --connect");
    serve->add_option("--out", serve_opts.out, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            auto report = qkd::cli::run(resolve(run_opts), message);
            emit(report, run_opts.out);
            return qkd::cli::exit_code(report);
        }
        if (*sweep) {
            std::cout << qkd::cli::sweep(resolve(sweep_opts), parameter, parse_values(values_text), repeats);
            return 0;
        }
        qkd::cli::ServeOptions options;
        options.role = role == "sender" ? qkd::Role::Sender : qkd::Role::Receiver;
        if (listen) options.listen = qkd::parse_endpoint(*listen);
        if (connect) options.connect = qkd::parse_endpoint(*connect);
        options.connect_timeout = std::chrono::milliseconds(timeout_ms);
        auto report = qkd::cli::serve(resolve(serve_opts), options);
        emit(report, serve_opts.out);
        return qkd::cli::exit_code(report);
    } catch (const std::exception& e) {
        std::cerr << "qkd: " << e.what() << '\n';
        return 1;
    }
}

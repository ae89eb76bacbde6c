#include "qkd_cli/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "qkd_cli/config.hpp"

namespace qkd::cli {
namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::span<const std::uint8_t> bytes) { EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()); }

    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, digest, &len);
        std::string out;
        char buf[3];
        for (unsigned i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof buf, "%02x", digest[i]);
            out += buf;
        }
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

std::string_view status_name(SessionStatus s) { return s == SessionStatus::Completed ? "completed" : "aborted"; }

nlohmann::json abort_reason(const PartyOutcome& p) {
    if (!p.abort_reason) return nullptr;
    return std::string(to_string(*p.abort_reason));
}

std::size_t reconciled_length(const PartyOutcome& p) {
    return p.reconciled.stage == KeyStage::Reconciled ? p.reconciled.bits.size() : 0;
}

nlohmann::json eve_section(const PartyOutcome& sender, const SessionConfig& config) {
    if (!sender.eve || config.eve.kind == EveKind::None) return nullptr;
    std::size_t certain = 0;
    for (const auto& r : sender.eve->records) certain += r.confidence == Confidence::Certain;
    return {
        {"kind", to_json(config)["eve.kind"]},
        {"records", sender.eve->records.size()},
        {"bits_known_of_sifted_key", sender.eve->bits_known_of_sifted_key},
    };
}

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

// Fields shared by both report flavours, filled from one party's outcome.
nlohmann::json base_report(const SessionConfig& config, const PartyOutcome& p, std::string_view role) {
    const std::size_t sifted = p.sift.kept_indices.size();
    return {
        {"version", kReportVersion},
        {"role", role},
        {"config", to_json(config)},
        {"seed", config.seed},
        {"status", status_name(p.status)},
        {"abort_reason", abort_reason(p)},
        {"counts",
         {
             {"pulses_sent", config.n_pulses},
             {"pulses_received", nullptr},
             {"sifted", sifted},
             {"sampled", p.qber.sample_indices.size()},
             {"reconciled", reconciled_length(p)},
             {"final", p.final_key.bits.size()},
         }},
        {"qber", p.qber.qber},
        {"qber_sample_errors", p.qber.mismatches},
        {"sifted_error_rate", nullptr},
        {"sift_ratio", nullptr},
        {"arrival_rate", nullptr},
        {"leaked_bits", p.reconciled.leaked_bits},
        {"eve_bound", p.reconciled.eve_known_bound},
        {"corrections", nullptr},
        {"eve", nullptr},
        {"final_key_sha256", key_fingerprint(p.final_key.bits)},
        {"transcript_sha256", transcript_fingerprint(p.transcript)},
        {"transcript_messages", p.transcript.size()},
        {"wall_time_ms", 0.0},
    };
}

void fill_arrivals(nlohmann::json& report, const PartyOutcome& p, const SessionConfig& config) {
    if (p.received_mask.empty()) return;
    const auto received = static_cast<std::size_t>(std::count(p.received_mask.begin(), p.received_mask.end(), 1));
    report["counts"]["pulses_received"] = received;
    report["arrival_rate"] = ratio(received, config.n_pulses);
    report["sift_ratio"] = ratio(p.sift.kept_indices.size(), received);
}

}  // namespace

std::string key_fingerprint(const Bits& key) {
    Sha256 h;
    h.update(pack_bits(key));
    return h.hex();
}

std::string transcript_fingerprint(const Transcript& transcript) {
    Sha256 h;
    for (const auto& entry : transcript) h.update(encode_frame(entry.message));
    return h.hex();
}

nlohmann::json session_report(const SessionConfig& config, const SessionOutcome& outcome, double wall_ms) {
    auto report = base_report(config, outcome.receiver, "both");
    fill_arrivals(report, outcome.receiver, config);
    report["sifted_error_rate"] = outcome.sifted_error_rate();
    report["corrections"] = outcome.receiver.corrections;
    report["eve"] = eve_section(outcome.sender, config);
    report["wall_time_ms"] = wall_ms;
    return report;
}

nlohmann::json party_report(const SessionConfig& config, const PartyOutcome& party, double wall_ms) {
    const bool sender = party.role == Role::Sender;
    auto report = base_report(config, party, sender ? "sender" : "receiver");
    fill_arrivals(report, party, config);
    if (!sender) report["corrections"] = party.corrections;
    if (sender) report["eve"] = eve_section(party, config);
    report["wall_time_ms"] = wall_ms;
    return report;
}

std::string report_csv(const nlohmann::json& r) {
    auto cell = [](const nlohmann::json& v) -> std::string {
        if (v.is_null()) return "";
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    const auto& c = r["counts"];
    std::ostringstream out;
    out << "protocol,n_pulses,seed,status,abort_reason,pulses_sent,pulses_received,sifted,sampled,reconciled,final,"
           "qber,sift_ratio,leaked_bits,eve_bound,final_key_sha256,wall_time_ms\n";
    out << cell(r["config"]["protocol"]) << ',' << cell(r["config"]["n_pulses"]) << ',' << cell(r["seed"]) << ','
        << cell(r["status"]) << ',' << cell(r["abort_reason"]) << ',' << cell(c["pulses_sent"]) << ','
        << cell(c["pulses_received"]) << ',' << cell(c["sifted"]) << ',' << cell(c["sampled"]) << ','
        << cell(c["reconciled"]) << ',' << cell(c["final"]) << ',' << cell(r["qber"]) << ',' << cell(r["sift_ratio"])
        << ',' << cell(r["leaked_bits"]) << ',' << cell(r["eve_bound"]) << ',' << cell(r["final_key_sha256"]) << ','
        << cell(r["wall_time_ms"]) << '\n';
    return out.str();
}

int exit_code(const nlohmann::json& report) { return report.at("status") == "completed" ? 0 : 2; }

}  // namespace qkd::cli

// Command line harness: batch protocol runs, standalone reconciliation and
// verification over bit files, and closed-form analysis reports.

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "qkdsim/abort.hpp"
#include "qkdsim/analysis.hpp"
#include "qkdsim/reconcile.hpp"
#include "qkdsim/replay.hpp"
#include "qkdsim/session.hpp"
#include "qkdsim/verify.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << data;
    if (!out) throw IoError("write failed: " + path);
}

void emit(const std::string& out_path, const std::string& data) {
    if (out_path.empty())
        std::cout << data;
    else
        write_file(out_path, data);
}

std::string fnv_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(qkd::fnv1a64(data)));
    return buf;
}

// ---- bit files: one "<hex> <bitlen>" vector per line, concatenated ----

qkd::BitVec read_bit_file(const std::string& path) {
    std::istringstream in(read_file(path));
    qkd::BitVec bits;
    std::string hex;
    size_t len = 0;
    while (in >> hex >> len) bits.append(qkd::BitVec::from_hex(hex, len));
    if (bits.size() == 0) throw std::invalid_argument("empty bit file: " + path);
    return bits;
}

void write_bit_file(const std::string& path, const qkd::BitVec& bits) {
    write_file(path, bits.to_hex() + " " + std::to_string(bits.size()) + "\n");
}

// ---- protocol config <-> flat JSON ----

json config_to_json(const qkd::ProtocolConfig& c) {
    return json{{"n", c.n},
                {"delta", c.delta},
                {"m", c.m},
                {"ns", c.n_s},
                {"target_residual", c.target_residual},
                {"max_rounds", c.max_rounds},
                {"abort_threshold_bit", c.abort_threshold_bit},
                {"abort_threshold_phase", c.abort_threshold_phase},
                {"eta", c.eta},
                {"security_margin", c.key_len_rule.security_margin},
                {"eps_b", c.channel.eps_b},
                {"eps_p", c.channel.eps_p},
                {"eps_bp", c.channel.eps_bp},
                {"eve_intercept", c.eve.intercept_prob},
                {"seed", c.seed}};
}

void apply_config_json(qkd::ProtocolConfig& c, const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "n") c.n = value.get<size_t>();
        else if (key == "delta") c.delta = value.get<double>();
        else if (key == "m") c.m = value.get<size_t>();
        else if (key == "ns") c.n_s = value.get<size_t>();
        else if (key == "target_residual") c.target_residual = value.get<double>();
        else if (key == "max_rounds") c.max_rounds = value.get<size_t>();
        else if (key == "abort_threshold_bit") c.abort_threshold_bit = value.get<double>();
        else if (key == "abort_threshold_phase") c.abort_threshold_phase = value.get<double>();
        else if (key == "eta") c.eta = value.get<double>();
        else if (key == "security_margin") c.key_len_rule.security_margin = value.get<size_t>();
        else if (key == "eps_b") c.channel.eps_b = value.get<double>();
        else if (key == "eps_p") c.channel.eps_p = value.get<double>();
        else if (key == "eps_bp") c.channel.eps_bp = value.get<double>();
        else if (key == "eve_intercept") c.eve.intercept_prob = value.get<double>();
        else if (key == "seed") c.seed = value.get<uint64_t>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

// ---- run subcommand ----

json trial_row(size_t trial, const qkd::SessionResult& r) {
    const qkd::SessionStats& st = r.stats;
    json row{{"trial", trial},
             {"outcome", r.outcome == qkd::SessionOutcome::Success ? "success" : "abort"},
             {"qubits_sent", st.qubits_sent},
             {"sifted", st.sifted},
             {"x_checks", st.x_checks},
             {"z_checks", st.z_checks},
             {"eps_b_hat", st.eps_b_hat},
             {"eps_p_hat", st.eps_p_hat},
             {"code_bits", st.code_bits},
             {"crude_rounds", st.crude_rounds.size()},
             {"crude_survivors", st.crude_survivors},
             {"subsets", st.subsets},
             {"accepted_subsets", st.accepted_subsets},
             {"rejected_subsets", st.rejected_subsets},
             {"announced_parity_bits", st.announced_parity_bits},
             {"key_len", st.key_len},
             {"transcript_fnv1a64", fnv_hex(r.transcript.to_jsonl())}};
    if (r.outcome == qkd::SessionOutcome::Success) {
        row["keys_match"] = st.keys_match;
        row["key_a"] = r.key_a.to_hex();
        row["key_b"] = r.key_b.to_hex();
        row["success_bound"] = st.success_bound;
        row["key_correctness_bound"] = st.key_correctness;
    } else {
        row["abort_stage"] = qkd::abort_stage_name(r.abort_stage);
        row["abort_reason"] = r.abort_reason;
    }
    return row;
}

json aggregate_rows(const std::vector<json>& rows) {
    json agg{{"trials", rows.size()}};
    size_t successes = 0, mismatches = 0;
    double key_len_sum = 0.0;
    double bound_min = 1.0, bound_max = 0.0;
    json aborts_by_stage = json::object();
    for (const json& row : rows) {
        if (row.at("outcome") == "success") {
            ++successes;
            if (!row.at("keys_match").get<bool>()) ++mismatches;
            key_len_sum += row.at("key_len").get<double>();
            const double b = row.at("success_bound").get<double>();
            bound_min = std::min(bound_min, b);
            bound_max = std::max(bound_max, b);
        } else {
            const std::string stage = row.at("abort_stage");
            aborts_by_stage[stage] = aborts_by_stage.value(stage, 0) + 1;
        }
    }
    agg["successes"] = successes;
    agg["success_rate"] = rows.empty() ? 0.0 : double(successes) / double(rows.size());
    agg["aborts_by_stage"] = aborts_by_stage;
    agg["key_mismatches"] = mismatches;
    agg["mean_key_len"] = successes ? key_len_sum / double(successes) : 0.0;
    if (successes) {
        agg["success_bound_min"] = bound_min;
        agg["success_bound_max"] = bound_max;
        agg["empirical_vs_bound"] =
            json{{"empirical_success_rate", agg["success_rate"]},
                 {"success_lower_bound", bound_max},
                 {"satisfied", agg["success_rate"].get<double>() >= bound_max}};
    }
    return agg;
}

std::string rows_to_csv(const std::vector<json>& rows) {
    static const char* cols[] = {
        "trial", "seed", "outcome", "abort_stage", "abort_reason", "qubits_sent",
        "sifted", "x_checks", "z_checks", "eps_b_hat", "eps_p_hat", "code_bits",
        "crude_rounds", "crude_survivors", "subsets", "accepted_subsets",
        "rejected_subsets", "announced_parity_bits", "key_len", "keys_match",
        "success_bound", "key_correctness_bound", "transcript_fnv1a64"};
    std::string out;
    for (size_t i = 0; i < std::size(cols); ++i)
        out += std::string(i ? "," : "") + cols[i];
    out += "\n";
    for (const json& row : rows) {
        for (size_t i = 0; i < std::size(cols); ++i) {
            if (i) out += ",";
            if (!row.contains(cols[i])) continue;
            const json& v = row.at(cols[i]);
            if (v.is_string())
                out += v.get<std::string>();
            else
                out += v.dump();
        }
        out += "\n";
    }
    return out;
}

int cmd_run(const qkd::ProtocolConfig& base, size_t trials, size_t threads,
            const std::string& out_path, const std::string& csv_path,
            const std::string& transcript_path) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<json> rows(trials);
    std::string trial0_transcript;
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= trials) return;
            qkd::ProtocolConfig c = base;
            c.seed = base.seed + i;
            const qkd::SessionResult r = qkd::run_session(c);
            json row = trial_row(i, r);
            row["seed"] = c.seed;
            rows[i] = std::move(row);
            if (i == 0 && !transcript_path.empty())
                trial0_transcript = r.transcript.to_jsonl();
        }
    };
    const size_t nthreads = std::max<size_t>(1, std::min(threads, trials));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    json report{{"schema_version", 1},
                {"config", config_to_json(base)},
                {"trials", rows},
                {"aggregate", aggregate_rows(rows)},
                {"timing", json{{"total_ms", ms}}}};
    emit(out_path, report.dump(2) + "\n");
    if (!csv_path.empty()) write_file(csv_path, rows_to_csv(rows));
    if (!transcript_path.empty()) write_file(transcript_path, trial0_transcript);
    return kExitOk;
}

// ---- reconcile / verify subcommands ----

json round_stats_json(const qkd::RoundStats& r) {
    return json{{"round", r.round},
                {"input_bits", r.input_bits},
                {"pairs", r.pairs},
                {"disagreements", r.disagreements},
                {"kept", r.kept},
                {"parity_bits_announced", r.parity_bits_announced},
                {"residual_estimate", r.residual_estimate},
                {"anomalous", r.anomalous}};
}

struct VerifyStageResult {
    qkd::BitVec out_a, out_b;
    size_t subsets = 0, accepted = 0;
};

VerifyStageResult run_verify_stage(const qkd::BitVec& a, const qkd::BitVec& b, size_t n_s,
                                   size_t m, qkd::Rng& rng, qkd::Transcript& transcript) {
    VerifyStageResult out;
    const auto subsets = qkd::partition_subsets(a, b, n_s);
    out.subsets = subsets.size();
    for (size_t i = 0; i < subsets.size(); ++i) {
        const auto strings = qkd::gen_parity_strings(n_s, m, rng, transcript, i);
        const auto outcome =
            qkd::verify_subset(subsets[i].first, subsets[i].second, strings, transcript, i);
        if (outcome.accepted) {
            ++out.accepted;
            out.out_a.append(outcome.survivors_a);
            out.out_b.append(outcome.survivors_b);
        }
    }
    return out;
}

int cmd_reconcile(const std::string& alice_path, const std::string& bob_path,
                  double target_residual, size_t max_rounds, size_t n_s, size_t m,
                  uint64_t seed, bool skip_cascade, const std::string& out_a_path,
                  const std::string& out_b_path, const std::string& stats_path) {
    const qkd::BitVec a_in = read_bit_file(alice_path);
    const qkd::BitVec b_in = read_bit_file(bob_path);
    if (a_in.size() != b_in.size())
        throw std::invalid_argument("bit files have different lengths (" +
                                    std::to_string(a_in.size()) + " vs " +
                                    std::to_string(b_in.size()) + ")");

    qkd::Transcript transcript;
    qkd::Rng pairing_rng = qkd::Rng::substream(seed, "pairing");
    qkd::Rng parity_rng = qkd::Rng::substream(seed, "parity-strings");

    json stats{{"schema_version", 1}, {"input_bits", a_in.size()}};
    qkd::BitVec a = a_in, b = b_in;
    try {
        if (!skip_cascade) {
            auto cascade = qkd::crude_cascade(a, b, target_residual, max_rounds,
                                              pairing_rng, transcript);
            json rounds = json::array();
            for (const auto& r : cascade.rounds) rounds.push_back(round_stats_json(r));
            stats["rounds"] = rounds;
            stats["crude_survivors"] = cascade.alice_bits.size();
            a = std::move(cascade.alice_bits);
            b = std::move(cascade.bob_bits);
        }
        const VerifyStageResult v = run_verify_stage(a, b, n_s, m, parity_rng, transcript);
        stats["subsets"] = v.subsets;
        stats["accepted_subsets"] = v.accepted;
        stats["rejected_subsets"] = v.subsets - v.accepted;
        stats["survivor_bits"] = v.out_a.size();
        stats["outcome"] = "done";
        if (!out_a_path.empty()) write_bit_file(out_a_path, v.out_a);
        if (!out_b_path.empty()) write_bit_file(out_b_path, v.out_b);
    } catch (const qkd::AbortError& e) {
        stats["outcome"] = "abort";
        stats["abort_stage"] = qkd::abort_stage_name(e.stage());
        stats["abort_reason"] = e.reason();
    }
    emit(stats_path, stats.dump(2) + "\n");
    return kExitOk;
}

// ---- analyze subcommand ----

int cmd_analyze(double eps_b, double eps_p, double eps_bp, double eta, double n,
                size_t n_s, size_t m, size_t g, double residual,
                const std::string& out_path) {
    const qkd::PhaseUpdate pu = qkd::phase_update(eps_b, eps_p, eps_bp);
    const double conf = qkd::epsilon1_confidence(eta, n, eps_p);
    const qkd::SubsetDiscard sd = qkd::subset_discard_prob(n_s, residual);
    const qkd::SuccessBound sb = qkd::success_lower_bound(g, m, eta, n, eps_p);

    const json out{{"schema_version", 1},
                   {"inputs", json{{"eps_b", eps_b},
                                   {"eps_p", eps_p},
                                   {"eps_bp", eps_bp},
                                   {"eta", eta},
                                   {"n", n},
                                   {"ns", n_s},
                                   {"m", m},
                                   {"g", g},
                                   {"residual", residual}}},
                   {"phase_update",
                    json{{"exact", pu.exact}, {"upper_bound", pu.upper_bound}}},
                   {"epsilon1_confidence", conf},
                   {"subset_discard",
                    json{{"single_error", sd.single_error}, {"all_errors", sd.all_errors}}},
                   {"success_lower_bound",
                    json{{"value", sb.value}, {"vacuous", sb.vacuous}}},
                   {"key_correctness_bound", qkd::key_correctness_bound(g, m)}};
    emit(out_path, out.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and reconciliation toolkit for a simplified BB84 protocol"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a batch of protocol sessions");
    std::string run_config, run_out, run_csv, run_transcript;
    size_t run_trials = 1, run_threads = 1;
    qkd::ProtocolConfig base;
    bool seed_set = false;
    uint64_t run_seed = 0;
    run->add_option("--config", run_config, "JSON config file (flat keys)");
    run->add_option("--trials", run_trials, "Number of sessions (seeds seed, seed+1, ...)");
    run->add_option("--seed", run_seed, "Base seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--threads", run_threads, "Worker threads (output is seed-ordered)");
    run->add_option("--out", run_out, "Report JSON path (default stdout)");
    run->add_option("--csv", run_csv, "Per-trial CSV path");
    run->add_option("--transcript", run_transcript, "Write trial 0's transcript JSONL here");
    double ov_eps_b = -1, ov_eps_p = -1, ov_eps_bp = -1, ov_eta = -1, ov_thr_bit = -1,
           ov_thr_phase = -1, ov_target = -1, ov_eve = -1, ov_delta = -1;
    long long ov_n = -1, ov_ns = -1, ov_m = -1, ov_margin = -1, ov_max_rounds = -1;
    run->add_option("--eps-b", ov_eps_b, "Channel bit-flip rate");
    run->add_option("--eps-p", ov_eps_p, "Channel phase-flip rate");
    run->add_option("--eps-bp", ov_eps_bp, "Channel joint (Y) rate");
    run->add_option("--n", ov_n, "Code-bit count");
    run->add_option("--delta", ov_delta, "Oversampling fraction");
    run->add_option("--ns", ov_ns, "Subset size");
    run->add_option("--m", ov_m, "Verification rounds per subset");
    run->add_option("--eta", ov_eta, "Phase bound slack");
    run->add_option("--threshold-bit", ov_thr_bit, "Abort threshold on eps_b estimate");
    run->add_option("--threshold-phase", ov_thr_phase, "Abort threshold on eps_p estimate");
    run->add_option("--target-residual", ov_target, "Crude-correction stopping rate");
    run->add_option("--eve-intercept", ov_eve, "Intercept-resend probability");
    run->add_option("--security-margin", ov_margin, "Key-length margin bits");
    run->add_option("--max-rounds", ov_max_rounds, "Crude-correction round cap");

    // reconcile / verify
    auto* rec = app.add_subcommand("reconcile",
                                   "Crude-correct and verify two bit files");
    auto* ver = app.add_subcommand("verify", "Verify two already-corrected bit files");
    std::string rv_alice, rv_bob, rv_out_a, rv_out_b, rv_stats;
    double rv_target = 1e-3;
    size_t rv_ns = 100, rv_m = 20, rv_max_rounds = 16;
    uint64_t rv_seed = 0;
    for (CLI::App* sc : {rec, ver}) {
        sc->add_option("alice", rv_alice, "Alice bit file")->required();
        sc->add_option("bob", rv_bob, "Bob bit file")->required();
        sc->add_option("--ns", rv_ns, "Subset size");
        sc->add_option("--m", rv_m, "Verification rounds per subset");
        sc->add_option("--seed", rv_seed, "Seed for pairings and parity strings");
        sc->add_option("--out-alice", rv_out_a, "Surviving bits, Alice side");
        sc->add_option("--out-bob", rv_out_b, "Surviving bits, Bob side");
        sc->add_option("--stats", rv_stats, "Stats JSON path (default stdout)");
    }
    rec->add_option("--target-residual", rv_target, "Crude-correction stopping rate");
    rec->add_option("--max-rounds", rv_max_rounds, "Crude-correction round cap");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Evaluate the closed-form bounds");
    double an_eps_b = 0.03, an_eps_p = 0.03, an_eps_bp = 0.0, an_eta = 0.05, an_n = 2000,
           an_residual = 1e-3;
    size_t an_ns = 100, an_m = 20, an_g = 8;
    std::string an_out;
    ana->add_option("--eps-b", an_eps_b, "Bit-flip rate");
    ana->add_option("--eps-p", an_eps_p, "Phase-flip rate");
    ana->add_option("--eps-bp", an_eps_bp, "Joint (Y) rate");
    ana->add_option("--eta", an_eta, "Phase bound slack");
    ana->add_option("--n", an_n, "Check-bit count");
    ana->add_option("--ns", an_ns, "Subset size");
    ana->add_option("--m", an_m, "Verification rounds");
    ana->add_option("--g", an_g, "Accepted subset count");
    ana->add_option("--residual", an_residual, "Residual rate after crude correction");
    ana->add_option("--out", an_out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadConfig;
    }

    try {
        if (run->parsed()) {
            if (!run_config.empty())
                apply_config_json(base, json::parse(read_file(run_config)));
            if (seed_set) base.seed = run_seed;
            if (ov_eps_b >= 0) base.channel.eps_b = ov_eps_b;
            if (ov_eps_p >= 0) base.channel.eps_p = ov_eps_p;
            if (ov_eps_bp >= 0) base.channel.eps_bp = ov_eps_bp;
            if (ov_eta >= 0) base.eta = ov_eta;
            if (ov_thr_bit >= 0) base.abort_threshold_bit = ov_thr_bit;
            if (ov_thr_phase >= 0) base.abort_threshold_phase = ov_thr_phase;
            if (ov_target >= 0) base.target_residual = ov_target;
            if (ov_eve >= 0) base.eve.intercept_prob = ov_eve;
            if (ov_delta >= 0) base.delta = ov_delta;
            if (ov_n >= 0) base.n = static_cast<size_t>(ov_n);
            if (ov_ns >= 0) base.n_s = static_cast<size_t>(ov_ns);
            if (ov_m >= 0) base.m = static_cast<size_t>(ov_m);
            if (ov_margin >= 0)
                base.key_len_rule.security_margin = static_cast<size_t>(ov_margin);
            if (ov_max_rounds >= 0) base.max_rounds = static_cast<size_t>(ov_max_rounds);
            base.validate();
            return cmd_run(base, run_trials, run_threads, run_out, run_csv,
                           run_transcript);
        }
        if (rec->parsed() || ver->parsed()) {
            if (rv_m < 1 || rv_m >= rv_ns)
                throw std::invalid_argument("need 1 <= m < ns");
            return cmd_reconcile(rv_alice, rv_bob, rv_target, rv_max_rounds, rv_ns, rv_m,
                                 rv_seed, ver->parsed(), rv_out_a, rv_out_b, rv_stats);
        }
        if (ana->parsed())
            return cmd_analyze(an_eps_b, an_eps_p, an_eps_bp, an_eta, an_n, an_ns, an_m,
                               an_g, an_residual, an_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "error: invalid config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    return kExitOk;
}

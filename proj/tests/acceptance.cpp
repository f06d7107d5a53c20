// Acceptance suite: end-to-end checks of the protocol implementation against
// its statistical laws and closed-form bounds, one printed line per check.
// Exit code is the number of failed checks.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qkdsim/analysis.hpp"
#include "qkdsim/privacy.hpp"
#include "qkdsim/reconcile.hpp"
#include "qkdsim/replay.hpp"
#include "qkdsim/session.hpp"
#include "qkdsim/verify.hpp"

using namespace qkd;

namespace {

struct Check {
    std::string detail;
    bool ok = true;
    double seconds = 0.0;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED: ") + what;
        }
    }
    void note(const std::string& what) {
        detail += (detail.empty() ? "" : "; ") + what;
    }
};

double sigma3(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Acceptance configuration: delta = 0.8 keeps the step-5 selection constraint
// (Z-sifted >= X-sifted + n) out of the statistics these checks target; at
// the default delta = 0.2 roughly 5% of sessions abort there by design.
ProtocolConfig acceptance_config(uint64_t seed) {
    ProtocolConfig c;
    c.n = 2000;
    c.delta = 0.8;
    c.n_s = 100;
    c.m = 20;
    c.seed = seed;
    return c;
}

BitVec flip_iid(const BitVec& b, double eps, Rng& rng) {
    BitVec out = b;
    for (size_t i = 0; i < out.size(); ++i)
        if (rng.next_unit() < eps) out.flip(i);
    return out;
}

// 1. Noiseless correctness: every session succeeds with identical keys and no
// verification rejects.
void criterion_noiseless(Check& c) {
    const size_t trials = 200;
    size_t successes = 0, equal_keys = 0, rejects = 0;
    for (size_t i = 0; i < trials; ++i) {
        const SessionResult r = run_session(acceptance_config(10000 + i));
        successes += r.outcome == SessionOutcome::Success;
        if (r.outcome == SessionOutcome::Success) {
            equal_keys += r.key_a == r.key_b && r.key_a.size() > 0;
            rejects += r.stats.rejected_subsets;
        }
    }
    c.expect(successes == trials, "all sessions succeed");
    c.expect(equal_keys == successes, "key_a == key_b in every trial");
    c.expect(rejects == 0, "verification never rejects");
    c.note(std::to_string(successes) + "/" + std::to_string(trials) +
           " success, 0 rejects");
}

// 2. Crude-round residual law at eps = 0.05 over 2e5 bits.
void criterion_crude_law(Check& c) {
    const double eps = 0.05;
    // independent oracle: enumerate the four pair patterns and condition on
    // parity agreement
    const double p_agree = (1 - eps) * (1 - eps) + eps * eps;
    const double oracle = eps * eps / p_agree;
    c.expect(std::abs(oracle - 2.762e-3) < 1e-6, "oracle equals 2.762e-3");
    c.expect(oracle > eps * eps, "law exceeds the squared rate");

    Rng rng(20250001);
    const size_t n = 200000;
    const BitVec a = BitVec::random(n, rng);
    const BitVec b = flip_iid(a, eps, rng);
    Transcript t;
    const auto round = crude_round(a, b, PairingPlan::random(n, rng), t);
    const double observed =
        double((round.kept_a ^ round.kept_b).popcount()) / double(round.stats.kept);
    c.expect(std::abs(observed - oracle) < sigma3(oracle, double(round.stats.kept)),
             "kept-bit rate within 3 sigma of " + fmt(oracle));
    c.expect(observed > eps * eps, "kept-bit rate strictly above eps^2");
    c.note("observed " + fmt(observed) + " vs oracle " + fmt(oracle));
}

// 3. Verification soundness: single planted error, n_s=40, m=8, 1e5 subsets;
// plus the exhaustive n_s=6, m=3 enumeration.
void criterion_verify_soundness(Check& c) {
    Rng rng(20250002);
    const size_t n_s = 40, m = 8, trials = 100000;
    size_t accepted = 0;
    for (size_t i = 0; i < trials; ++i) {
        Transcript t;
        const BitVec s_a = BitVec::random(n_s, rng);
        BitVec s_b = s_a;
        s_b.flip(rng.next_below(n_s));
        const auto strings = gen_parity_strings(n_s, m, rng, t, 0);
        accepted += verify_subset(s_a, s_b, strings, t, 0).accepted;
    }
    const double frac = double(accepted) / double(trials);
    const double bound = std::ldexp(1.0, -int(m));
    c.expect(frac <= bound + sigma3(bound, trials),
             "acceptance fraction <= 2^-8 within 3 sigma");
    c.note("fraction " + fmt(frac) + " vs bound " + fmt(bound));

    auto from_uint = [](uint64_t value, size_t len) {
        BitVec v(len);
        for (size_t i = 0; i < len; ++i)
            if ((value >> i) & 1) v.set(i, true);
        return v;
    };
    double worst = 0.0;
    for (size_t err = 0; err < 6; ++err) {
        size_t total = 0, missed = 0;
        for (uint64_t r1 = 1; r1 < 64; ++r1)
            for (uint64_t r2 = 1; r2 < 32; ++r2)
                for (uint64_t r3 = 1; r3 < 16; ++r3) {
                    ParityStringSet strings;
                    strings.strings = {from_uint(r1, 6), from_uint(r2, 5),
                                       from_uint(r3, 4)};
                    BitVec s_b(6);
                    s_b.set(err, true);
                    Transcript tt;
                    ++total;
                    missed += verify_subset(BitVec(6), s_b, strings, tt, 0).accepted;
                }
        worst = std::max(worst, double(missed) / double(total));
    }
    c.expect(worst <= 0.125, "exhaustive n_s=6,m=3 miss probability <= 2^-3");
    c.note("exhaustive worst miss " + fmt(worst));
}

// 4. Phase-update formula vs conditional Monte Carlo.
void criterion_phase_update(Check& c) {
    {
        Rng rng(20250003);
        const ChannelParams params(0.2, 0.2, 0.0);
        size_t survivors = 0, flips = 0;
        for (int i = 0; i < 1000000; ++i) {
            const double u = rng.next_unit();
            const bool bit = u < params.p_x() ||
                             (u >= params.p_x() + params.p_z() &&
                              u < params.p_x() + params.p_z() + params.p_y());
            if (bit) continue;
            ++survivors;
            flips += u >= params.p_x() && u < params.p_x() + params.p_z();
        }
        const double observed = double(flips) / double(survivors);
        const double expected = phase_update(0.2, 0.2, 0.0).upper_bound;
        c.expect(std::abs(expected - 0.25) < 1e-12, "bound equals eps_p/(1-eps_b) = 0.25");
        c.expect(std::abs(observed - expected) < sigma3(expected, double(survivors)),
                 "conditional rate 0.25 within 3 sigma");
        c.note("conditional rate " + fmt(observed));
    }
    {
        // all phase error mass rides on sigma_y: conditioning on no bit flip
        // leaves exactly zero phase flips
        Rng rng(20250004);
        const ChannelParams params(0.1, 0.1, 0.1);
        size_t flips = 0;
        for (int i = 0; i < 1000000; ++i) {
            const double u = rng.next_unit();
            const bool bit = u < params.p_x() + params.p_z() + params.p_y() &&
                             u >= params.p_x() + params.p_z();
            const bool phase_only = u >= params.p_x() && u < params.p_x() + params.p_z();
            if (!bit && phase_only) ++flips;
        }
        c.expect(flips == 0, "conditional rate exactly 0 at eps_bp=0.1");
        c.expect(phase_update(0.1, 0.1, 0.1).exact == 0.0, "exact formula gives 0");
    }
}

// 5. Subset-discard bracket at residual 1e-3, n_s=100, m=30, 1e5 subsets.
void criterion_discard_bracket(Check& c) {
    Rng rng(20250005);
    const size_t n_s = 100, m = 30, trials = 100000;
    const double eps = 1e-3;
    size_t rejected = 0;
    for (size_t i = 0; i < trials; ++i) {
        Transcript t;
        const BitVec s_a = BitVec::random(n_s, rng);
        const BitVec s_b = flip_iid(s_a, eps, rng);
        const auto strings = gen_parity_strings(n_s, m, rng, t, 0);
        rejected += !verify_subset(s_a, s_b, strings, t, 0).accepted;
    }
    const double frac = double(rejected) / double(trials);
    const SubsetDiscard d = subset_discard_prob(n_s, eps);
    c.expect(frac >= d.single_error - sigma3(d.single_error, trials),
             "rate above the single-error term " + fmt(d.single_error));
    c.expect(frac <= d.all_errors + sigma3(d.all_errors, trials),
             "rate below the any-error term " + fmt(d.all_errors));
    c.note("rejection rate " + fmt(frac) + " in [" + fmt(d.single_error) + ", " +
           fmt(d.all_errors) + "]");
}

// 6. Eavesdropper detection: estimates near 1/4 in both bases, and
// full-intercept sessions always abort at the check stage.
void criterion_eve_detection(Check& c) {
    {
        ProtocolConfig big = acceptance_config(20250006);
        big.n = 100000;
        big.delta = 0.2;
        big.eve = EveStrategy::intercept_resend(1.0);
        const SessionResult r = run_session(big);
        c.expect(r.outcome == SessionOutcome::Abort, "large session aborts");
        c.expect(r.stats.x_checks >= 10000 && r.stats.z_checks >= 10000,
                 ">= 1e4 checks per basis");
        c.expect(std::abs(r.stats.eps_b_hat - 0.25) <= 0.01,
                 "Z-basis estimate 0.25 +- 0.01");
        c.expect(std::abs(r.stats.eps_p_hat - 0.25) <= 0.01,
                 "X-basis estimate 0.25 +- 0.01");
        c.note("estimates (" + fmt(r.stats.eps_b_hat) + ", " + fmt(r.stats.eps_p_hat) +
               ") at " + std::to_string(r.stats.x_checks + r.stats.z_checks) + " checks");
    }
    size_t aborts_at_check = 0;
    for (size_t i = 0; i < 100; ++i) {
        ProtocolConfig cfg = acceptance_config(20300 + i);
        cfg.eve = EveStrategy::intercept_resend(1.0);
        const SessionResult r = run_session(cfg);
        aborts_at_check += r.outcome == SessionOutcome::Abort &&
                           r.abort_stage == AbortStage::Check;
    }
    c.expect(aborts_at_check == 100, "100/100 sessions abort at the check stage");
    c.note(std::to_string(aborts_at_check) + "/100 check-stage aborts");
}

// 7. End-to-end success bound at eps_b = eps_p = 0.03 over 200 sessions.
void criterion_end_to_end_bound(Check& c) {
    const size_t trials = 200;
    size_t successes = 0, mismatches = 0;
    size_t max_g = 0;
    double strictest_bound = 0.0;
    for (size_t i = 0; i < trials; ++i) {
        ProtocolConfig cfg = acceptance_config(20250100 + i);
        cfg.channel = ChannelParams(0.03, 0.03, 0.0);
        const SessionResult r = run_session(cfg);
        if (r.outcome == SessionOutcome::Success) {
            ++successes;
            mismatches += !r.stats.keys_match;
            max_g = std::max(max_g, r.stats.accepted_subsets);
            strictest_bound = std::max(strictest_bound, r.stats.success_bound);
        }
    }
    const double rate = double(successes) / double(trials);
    c.expect(rate >= strictest_bound,
             "success fraction >= bound at realized parameters");
    const double mismatch_cap = double(max_g) * std::ldexp(1.0, -20);
    c.expect(double(mismatches) / std::max<size_t>(successes, 1) <= mismatch_cap,
             "mismatch fraction <= g 2^-20");
    c.expect(mismatches == 0, "zero observed key mismatches");
    c.note("success " + std::to_string(successes) + "/" + std::to_string(trials) +
           ", bound " + fmt(strictest_bound) + ", mismatches " +
           std::to_string(mismatches));
}

// 8. Coset extractor, exhaustive for k <= 10.
void criterion_coset_extractor(Check& c) {
    Rng rng(20250007);
    Transcript t;
    for (size_t k = 2; k <= 10; ++k) {
        // exercise build_code's announced spec end to end at small scale
        const double eps1 = 0.05 * double(k % 4);
        CodeSpec spec;
        try {
            spec = build_code(k, eps1, KeyLenPolicy{1}, rng, t);
        } catch (const AbortError&) {
            continue;  // tiny blocks can have no capacity; not under test here
        }
        const size_t dim = spec.g2.rows();

        std::vector<BitVec> codewords;
        for (uint64_t mask = 0; mask < (1ull << dim); ++mask) {
            BitVec w(k);
            for (size_t r = 0; r < dim; ++r)
                if ((mask >> r) & 1) w ^= spec.g2.row(r);
            codewords.push_back(w);
        }
        for (const BitVec& w : codewords)
            c.expect(!mat_vec(spec.h2, w).any(), "H2 annihilates C_2 (k=" +
                                                     std::to_string(k) + ")");

        std::set<std::string> labels;
        bool constant_on_cosets = true, recover_ok = true;
        for (uint64_t x = 0; x < (1ull << k); ++x) {
            BitVec v(k);
            for (size_t i = 0; i < k; ++i)
                if ((x >> i) & 1) v.set(i, true);
            const BitVec label = extract_key(v, spec, Party::Alice).key;
            labels.insert(label.to_hex());
            for (const BitVec& w : codewords)
                constant_on_cosets &=
                    extract_key(v ^ w, spec, Party::Alice).key == label;

            // bob_recover(alice_announce(x)) is the identity on v when x_b == x
            const Announcement ann = alice_announce(v, rng, t);
            recover_ok &= bob_recover(v, ann.announced) == ann.v;
        }
        c.expect(constant_on_cosets, "extract_key constant on cosets (k=" +
                                         std::to_string(k) + ")");
        c.expect(labels.size() == (1ull << spec.key_len),
                 "labels biject with cosets (k=" + std::to_string(k) + ")");
        c.expect(recover_ok, "bob_recover inverts alice_announce (k=" +
                                 std::to_string(k) + ")");
    }
}

// 9. Determinism: byte-identical transcripts and reports across runs and
// thread counts (timing excluded).
void criterion_determinism(Check& c) {
    {
        ProtocolConfig cfg = acceptance_config(20250008);
        cfg.channel = ChannelParams(0.02, 0.04, 0.01);
        const SessionResult r1 = run_session(cfg);
        const SessionResult r2 = run_session(cfg);
        c.expect(r1.transcript.to_jsonl() == r2.transcript.to_jsonl(),
                 "library transcripts byte-identical");
        c.expect(r1.key_a == r2.key_a && r1.key_b == r2.key_b, "keys identical");
        c.expect(replay_key_from_transcript(r1.transcript, r1.bob_measured_bits) ==
                     r1.key_b,
                 "transcript replay reproduces Bob's key");
    }

    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("qkdsim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto run_cli = [&](const std::string& args, const fs::path& out) {
        const std::string cmd = std::string(QKDSIM_CLI_PATH) + " " + args + " --out " +
                                out.string() + " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    auto strip_timing = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string s = ss.str();
        const size_t at = s.find("\"timing\"");
        if (at != std::string::npos) {
            // timing is one nested object; cut to the end of its line block
            const size_t open = s.find('{', at);
            const size_t close = s.find('}', open);
            s.erase(at, close - at + 1);
        }
        return s;
    };
    const std::string base =
        "run --n 2000 --delta 0.8 --eps-b 0.03 --eps-p 0.03 --trials 20 --seed 31415 ";
    bool ok = run_cli(base + "--threads 1", dir / "r1.json") &&
              run_cli(base + "--threads 1", dir / "r2.json") &&
              run_cli(base + "--threads 4", dir / "r4.json");
    c.expect(ok, "CLI runs complete");
    if (ok) {
        const std::string r1 = strip_timing(dir / "r1.json");
        c.expect(r1 == strip_timing(dir / "r2.json"),
                 "reports byte-identical across runs");
        c.expect(r1 == strip_timing(dir / "r4.json"),
                 "reports byte-identical across thread counts");
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
}

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0 = none
    std::function<void(Check&)> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "noiseless correctness (200 sessions, n=2000)", 10.0, criterion_noiseless},
        {2, "crude-round residual law (eps=0.05, 2e5 bits)", 1.0, criterion_crude_law},
        {3, "verification soundness (planted errors)", 0, criterion_verify_soundness},
        {4, "phase-update formula (conditional Monte Carlo)", 0, criterion_phase_update},
        {5, "subset-discard bracket (1e5 subsets)", 0, criterion_discard_bracket},
        {6, "eavesdropper detection (intercept-resend)", 0, criterion_eve_detection},
        {7, "end-to-end success bound (200 sessions)", 120.0, criterion_end_to_end_bound},
        {8, "coset extractor exhaustive (k <= 10)", 0, criterion_coset_extractor},
        {9, "determinism across runs and thread counts", 0, criterion_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        criterion.fn(check);
        check.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criterion.time_limit_s > 0 && check.seconds > criterion.time_limit_s)
            check.expect(false, "runtime " + fmt(check.seconds) + "s over limit " +
                                    fmt(criterion.time_limit_s) + "s");
        std::printf("[%s] criterion %d: %s — %s (%.2fs)\n",
                    check.ok ? "PASS" : "FAIL", criterion.id, criterion.name.c_str(),
                    check.detail.c_str(), check.seconds);
        failures += !check.ok;
    }
    std::printf("%d/%zu acceptance criteria passed\n",
                int(criteria.size()) - failures, criteria.size());
    return failures;
}

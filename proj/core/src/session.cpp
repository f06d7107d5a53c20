#include "qkdsim/session.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

#include "qkdsim/analysis.hpp"
#include "qkdsim/verify.hpp"

namespace qkd {

void ProtocolConfig::validate() const {
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (delta < 0.0) throw std::invalid_argument("config: delta must be >= 0");
    if (n_s < 1) throw std::invalid_argument("config: n_s must be >= 1");
    if (m < 1 || m >= n_s) throw std::invalid_argument("config: need 1 <= m < n_s");
    if (target_residual <= 0.0 || target_residual >= 1.0)
        throw std::invalid_argument("config: target_residual must be in (0,1)");
    if (max_rounds < 1) throw std::invalid_argument("config: max_rounds must be >= 1");
    if (abort_threshold_bit <= 0.0 || abort_threshold_bit >= 1.0)
        throw std::invalid_argument("config: abort_threshold_bit must be in (0,1)");
    if (abort_threshold_phase <= 0.0 || abort_threshold_phase >= 1.0)
        throw std::invalid_argument("config: abort_threshold_phase must be in (0,1)");
    if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("config: eta must be in (0,1)");
    // Re-run the ChannelParams/EveStrategy invariants in case the structs
    // were filled field-by-field (e.g. from a config file).
    ChannelParams(channel.eps_b, channel.eps_p, channel.eps_bp);
    EveStrategy::intercept_resend(eve.intercept_prob);
}

size_t ProtocolConfig::transmit_count() const {
    return static_cast<size_t>(std::llround((4.0 + delta) * static_cast<double>(n)));
}

SessionStreams SessionStreams::from_seed(uint64_t seed) {
    return SessionStreams{
        Rng::substream(seed, "alice-bits"),   Rng::substream(seed, "alice-bases"),
        Rng::substream(seed, "bob-bases"),    Rng::substream(seed, "channel"),
        Rng::substream(seed, "eve"),          Rng::substream(seed, "check-select"),
        Rng::substream(seed, "pairing"),      Rng::substream(seed, "parity-strings"),
        Rng::substream(seed, "code"),
    };
}

std::pair<std::vector<PrepRecord>, std::vector<QubitState>> alice_prepare_batch(
    const ProtocolConfig& config, Rng& w_rng, Rng& bit_rng) {
    const size_t count = config.transmit_count();
    std::vector<PrepRecord> records;
    std::vector<QubitState> states;
    records.reserve(count);
    states.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        const uint64_t w = 1 + w_rng.next_below(4);  // W = {1,2,3,4}
        const Basis basis = (w == 1) ? Basis::X : Basis::Z;
        const bool bit = bit_rng.next_bit();
        records.push_back({basis, bit});
        states.push_back(prepare(basis, bit));
    }
    return {std::move(records), std::move(states)};
}

std::vector<MeasRecord> transmit_and_measure(const std::vector<QubitState>& states,
                                             const ProtocolConfig& config, Rng& eve_rng,
                                             Rng& channel_rng, Rng& bob_rng) {
    std::vector<MeasRecord> out;
    out.reserve(states.size());
    for (QubitState s : states) {
        s = eve_act(s, config.eve, eve_rng);
        s = channel_transmit(s, config.channel, channel_rng);
        const Basis basis = bob_rng.next_bit() ? Basis::X : Basis::Z;
        const MeasureResult r = measure(s, basis, bob_rng);
        out.push_back({basis, r.bit});
    }
    return out;
}

namespace {

std::string bases_payload(const BitVec& bases) {
    return nlohmann::json{{"bits", bases.to_hex()}, {"len", bases.size()}}.dump();
}

BitVec basis_bits(size_t count, auto&& basis_at) {
    BitVec v(count);
    for (size_t i = 0; i < count; ++i)
        if (basis_at(i) == Basis::X) v.set(i, true);
    return v;
}

}  // namespace

SiftedData sift(const std::vector<PrepRecord>& alice, const std::vector<MeasRecord>& bob,
                const ProtocolConfig& config, Transcript& transcript) {
    if (alice.size() != bob.size()) throw std::invalid_argument("sift: length mismatch");

    const BitVec alice_bases =
        basis_bits(alice.size(), [&](size_t i) { return alice[i].basis; });
    const BitVec bob_bases = basis_bits(bob.size(), [&](size_t i) { return bob[i].basis; });
    transcript.append(Party::Alice, kind::bases, bases_payload(alice_bases));
    transcript.append(Party::Bob, kind::bases, bases_payload(bob_bases));

    SiftedData out;
    for (size_t i = 0; i < alice.size(); ++i) {
        if (alice[i].basis != bob[i].basis) continue;
        out.positions.push_back(i);
        out.alice_bits.push_back(alice[i].bit);
        out.bob_bits.push_back(bob[i].bit);
        out.bases.push_back(alice[i].basis);
    }
    if (out.positions.size() < 2 * config.n)
        throw AbortError(AbortStage::Sift, "InsufficientSiftedBits");
    return out;
}

namespace {

// Sample k distinct elements of pool (order-independent, result sorted).
std::vector<size_t> sample_without_replacement(std::vector<size_t> pool, size_t k,
                                               Rng& rng) {
    shuffle(pool, rng);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<size_t> set_difference_sorted(const std::vector<size_t>& a,
                                          const std::vector<size_t>& b) {
    std::vector<size_t> out;
    out.reserve(a.size() - b.size());
    size_t j = 0;
    for (size_t v : a) {
        if (j < b.size() && b[j] == v)
            ++j;
        else
            out.push_back(v);
    }
    return out;
}

}  // namespace

CheckSelection select_check_bits(const SiftedData& sifted, const ProtocolConfig& config,
                                 Rng& rng, Transcript& transcript) {
    CheckSelection sel;
    std::vector<size_t> z_positions;
    for (size_t i = 0; i < sifted.bases.size(); ++i) {
        if (sifted.bases[i] == Basis::X)
            sel.x_checks.push_back(i);
        else
            z_positions.push_back(i);
    }
    if (sel.x_checks.empty())
        throw AbortError(AbortStage::Select, "ImbalancedSift: no X-basis survivors");
    if (z_positions.size() < sel.x_checks.size() + config.n)
        throw AbortError(AbortStage::Select,
                         "ImbalancedSift: too few Z-basis bits for checks plus code");

    sel.z_checks = sample_without_replacement(z_positions, sel.x_checks.size(), rng);
    std::vector<size_t> remaining = set_difference_sorted(z_positions, sel.z_checks);
    sel.discards = sample_without_replacement(remaining, remaining.size() - config.n, rng);
    sel.code = set_difference_sorted(remaining, sel.discards);

    transcript.append(Party::Bob, kind::check_reveal,
                      nlohmann::json{{"x_checks", sel.x_checks},
                                     {"z_checks", sel.z_checks},
                                     {"discards", sel.discards}}
                          .dump());
    return sel;
}

CheckEstimate estimate_errors(const SiftedData& sifted, const CheckSelection& selection,
                              Transcript& transcript) {
    if (selection.x_checks.empty() || selection.z_checks.empty())
        throw AbortError(AbortStage::Estimate, "EmptyCheckSet");

    const BitVec az = sifted.alice_bits.gather(selection.z_checks);
    const BitVec bz = sifted.bob_bits.gather(selection.z_checks);
    const BitVec ax = sifted.alice_bits.gather(selection.x_checks);
    const BitVec bx = sifted.bob_bits.gather(selection.x_checks);

    auto reveal = [&](const BitVec& z, const BitVec& x) {
        return nlohmann::json{{"z_bits", z.to_hex()},
                              {"z_len", z.size()},
                              {"x_bits", x.to_hex()},
                              {"x_len", x.size()}}
            .dump();
    };
    transcript.append(Party::Alice, kind::check_reveal, reveal(az, ax));
    transcript.append(Party::Bob, kind::check_reveal, reveal(bz, bx));

    CheckEstimate est;
    est.z_count = selection.z_checks.size();
    est.x_count = selection.x_checks.size();
    est.z_disagree = (az ^ bz).popcount();
    est.x_disagree = (ax ^ bx).popcount();
    est.eps_b_hat = static_cast<double>(est.z_disagree) / static_cast<double>(est.z_count);
    est.eps_p_hat = static_cast<double>(est.x_disagree) / static_cast<double>(est.x_count);
    return est;
}

bool abort_decision(const CheckEstimate& estimate, const ProtocolConfig& config) {
    return !(estimate.eps_b_hat > config.abort_threshold_bit ||
             estimate.eps_p_hat > config.abort_threshold_phase);
}

SessionResult run_session(const ProtocolConfig& config) {
    config.validate();

    SessionResult res;
    SessionStats& st = res.stats;
    SessionStreams rng = SessionStreams::from_seed(config.seed);

    auto [prep, states] = alice_prepare_batch(config, rng.alice_bases, rng.alice_bits);
    st.qubits_sent = states.size();
    res.alice_sent_bits = BitVec(prep.size());
    for (size_t i = 0; i < prep.size(); ++i) res.alice_sent_bits.set(i, prep[i].bit);

    const std::vector<MeasRecord> meas =
        transmit_and_measure(states, config, rng.eve, rng.channel, rng.bob_bases);
    res.bob_measured_bits = BitVec(meas.size());
    for (size_t i = 0; i < meas.size(); ++i) res.bob_measured_bits.set(i, meas[i].bit);

    try {
        const SiftedData sifted = sift(prep, meas, config, res.transcript);
        st.sifted = sifted.positions.size();

        const CheckSelection sel =
            select_check_bits(sifted, config, rng.check_select, res.transcript);
        st.x_checks = sel.x_checks.size();
        st.z_checks = sel.z_checks.size();
        st.selection_discards = sel.discards.size();
        st.code_bits = sel.code.size();

        const CheckEstimate est = estimate_errors(sifted, sel, res.transcript);
        st.eps_b_hat = est.eps_b_hat;
        st.eps_p_hat = est.eps_p_hat;
        if (!abort_decision(est, config))
            throw AbortError(AbortStage::Check, "CheckFailure");

        // Steps 7-10: crude correction, verification, coset extraction.
        CascadeResult cascade = crude_cascade(
            sifted.alice_bits.gather(sel.code), sifted.bob_bits.gather(sel.code),
            config.target_residual, config.max_rounds, rng.pairing, res.transcript);
        st.crude_rounds = cascade.rounds;
        st.crude_survivors = cascade.alice_bits.size();
        for (const RoundStats& r : cascade.rounds)
            st.announced_parity_bits += r.parity_bits_announced;

        const auto subsets =
            partition_subsets(cascade.alice_bits, cascade.bob_bits, config.n_s);
        st.subsets = subsets.size();
        st.partition_discards = st.crude_survivors - subsets.size() * config.n_s;

        BitVec x_a, x_b;
        for (size_t i = 0; i < subsets.size(); ++i) {
            const ParityStringSet strings = gen_parity_strings(
                config.n_s, config.m, rng.parity_strings, res.transcript, i);
            const VerifyOutcome outcome = verify_subset(
                subsets[i].first, subsets[i].second, strings, res.transcript, i);
            st.announced_parity_bits +=
                outcome.accepted ? config.m : outcome.reject_round;
            if (outcome.accepted) {
                ++st.accepted_subsets;
                x_a.append(outcome.survivors_a);
                x_b.append(outcome.survivors_b);
            } else {
                ++st.rejected_subsets;
            }
        }

        if (st.eps_b_hat >= 1.0)
            throw AbortError(AbortStage::Privacy, "NoKeyCapacity");
        st.eps_p_prime = phase_update(st.eps_b_hat, st.eps_p_hat, 0.0).upper_bound;
        st.eps1 = st.eps_p_prime + config.eta;
        if (st.eps1 >= 0.5) throw AbortError(AbortStage::Privacy, "NoKeyCapacity");
        if (x_a.empty()) throw AbortError(AbortStage::Privacy, "NoKeyCapacity");

        const CodeSpec spec =
            build_code(x_a.size(), st.eps1, config.key_len_rule, rng.code, res.transcript);
        st.key_len = spec.key_len;

        const Announcement ann = alice_announce(x_a, rng.code, res.transcript);
        const BitVec v_b = bob_recover(x_b, ann.announced);
        res.key_a = extract_key(ann.v, spec, Party::Alice).key;
        res.key_b = extract_key(v_b, spec, Party::Bob).key;

        st.keys_match = res.key_a == res.key_b;
        st.success_bound =
            success_lower_bound(st.accepted_subsets, config.m, config.eta,
                                static_cast<double>(st.x_checks + st.z_checks),
                                st.eps_p_hat)
                .value;
        st.key_correctness = key_correctness_bound(st.accepted_subsets, config.m);
        res.outcome = SessionOutcome::Success;
    } catch (const AbortError& e) {
        res.outcome = SessionOutcome::Abort;
        res.abort_stage = e.stage();
        res.abort_reason = e.reason();
        res.transcript.append(
            Party::Alice, kind::abort,
            nlohmann::json{{"stage", abort_stage_name(e.stage())}, {"reason", e.reason()}}
                .dump());
    }
    return res;
}

}  // namespace qkd

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkdsim/abort.hpp"
#include "qkdsim/gf2.hpp"
#include "qkdsim/privacy.hpp"
#include "qkdsim/qsim.hpp"
#include "qkdsim/reconcile.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/transcript.hpp"

namespace qkd {

struct ProtocolConfig {
    size_t n = 1000;          // target code-bit count
    double delta = 0.2;       // oversampling: (4 + delta) * n qubits sent
    size_t m = 20;            // verification rounds per subset
    size_t n_s = 100;         // subset size
    double target_residual = 1e-3;
    size_t max_rounds = 16;   // crude-correction round cap
    double abort_threshold_bit = 0.11;
    double abort_threshold_phase = 0.11;
    double eta = 0.05;        // slack added to the phase bound
    KeyLenPolicy key_len_rule;
    ChannelParams channel;
    EveStrategy eve;
    uint64_t seed = 0;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
    size_t transmit_count() const;  // round((4 + delta) * n)
};

/// Per-session randomness: one labeled substream per role, all derived from
/// the master seed, so a session replays bit for bit.
struct SessionStreams {
    Rng alice_bits;
    Rng alice_bases;
    Rng bob_bases;
    Rng channel;
    Rng eve;
    Rng check_select;
    Rng pairing;
    Rng parity_strings;
    Rng code;

    static SessionStreams from_seed(uint64_t seed);
};

struct PrepRecord {
    Basis basis;
    bool bit;
};

struct MeasRecord {
    Basis basis;
    bool bit;
};

/// Draws from W = {1,2,3,4} per qubit: 1 prepares in X, 2-4 in Z; the bit
/// value is a fair coin. Returns (4 + delta) * n records and states.
std::pair<std::vector<PrepRecord>, std::vector<QubitState>> alice_prepare_batch(
    const ProtocolConfig& config, Rng& w_rng, Rng& bit_rng);

/// Each state passes eve_act, then channel_transmit; Bob measures in a
/// fresh fair-coin basis.
std::vector<MeasRecord> transmit_and_measure(const std::vector<QubitState>& states,
                                             const ProtocolConfig& config, Rng& eve_rng,
                                             Rng& channel_rng, Rng& bob_rng);

struct SiftedData {
    std::vector<size_t> positions;  // global transmission indices, ascending
    BitVec alice_bits;
    BitVec bob_bits;
    std::vector<Basis> bases;       // the matching basis per kept position
};

/// Both parties announce bases; positions where they differ are dropped.
/// Aborts (InsufficientSiftedBits) when fewer than 2n positions survive.
SiftedData sift(const std::vector<PrepRecord>& alice, const std::vector<MeasRecord>& bob,
                const ProtocolConfig& config, Transcript& transcript);

/// Index lists are relative to the sifted sequence, each sorted ascending.
struct CheckSelection {
    std::vector<size_t> x_checks;   // every X-basis sifted position
    std::vector<size_t> z_checks;   // equal number of random Z-basis positions
    std::vector<size_t> discards;   // random Z positions dropped to reach n
    std::vector<size_t> code;       // exactly n Z-basis positions
};

/// Bob's step-5 choice, announced as a "check_reveal" record. Aborts
/// (ImbalancedSift) when there are no X-basis survivors or too few Z-basis
/// survivors to match the X count and still leave n code bits.
CheckSelection select_check_bits(const SiftedData& sifted, const ProtocolConfig& config,
                                 Rng& rng, Transcript& transcript);

struct CheckEstimate {
    double eps_b_hat = 0.0;  // Z-basis disagreement fraction
    double eps_p_hat = 0.0;  // X-basis disagreement fraction
    size_t z_count = 0;
    size_t x_count = 0;
    size_t z_disagree = 0;
    size_t x_disagree = 0;
};

/// Both parties reveal their check-bit values ("check_reveal" records);
/// disagreement fractions per basis become the error estimates.
CheckEstimate estimate_errors(const SiftedData& sifted, const CheckSelection& selection,
                              Transcript& transcript);

/// Proceed unless an estimate strictly exceeds its threshold (ties proceed).
bool abort_decision(const CheckEstimate& estimate, const ProtocolConfig& config);

struct SessionStats {
    size_t qubits_sent = 0;
    size_t sifted = 0;
    size_t x_checks = 0;
    size_t z_checks = 0;
    double eps_b_hat = 0.0;
    double eps_p_hat = 0.0;
    size_t code_bits = 0;
    size_t selection_discards = 0;
    std::vector<RoundStats> crude_rounds;
    size_t crude_survivors = 0;
    size_t partition_discards = 0;
    size_t subsets = 0;
    size_t accepted_subsets = 0;   // g
    size_t rejected_subsets = 0;
    size_t announced_parity_bits = 0;  // per side: crude pair parities + verify rounds
    double eps_p_prime = 0.0;      // upper-bound posterior phase rate
    double eps1 = 0.0;             // eps_p_prime + eta
    size_t key_len = 0;
    double success_bound = 0.0;    // paper bound at realized (g, m, eta, checks)
    double key_correctness = 0.0;  // 1 - g 2^-m
    bool keys_match = false;       // simulator-side diagnostic
};

enum class SessionOutcome { Success, Abort };

struct SessionResult {
    SessionOutcome outcome = SessionOutcome::Abort;
    AbortStage abort_stage = AbortStage::Sift;
    std::string abort_reason;
    BitVec key_a;
    BitVec key_b;
    SessionStats stats;
    Transcript transcript;

    // Simulator-side private records (never announced); what each party
    // would hold locally. Useful for replay audits and analysis.
    BitVec alice_sent_bits;
    BitVec bob_measured_bits;
};

/// Runs the whole protocol: prepare, transmit, sift, check, crude bit-flip
/// correction, zero-error verification, and coset key extraction. Aborts are
/// reported in the result, not thrown.
SessionResult run_session(const ProtocolConfig& config);

}  // namespace qkd

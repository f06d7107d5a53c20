#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qkdsim/gf2.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/transcript.hpp"

namespace qkd {

/// One round's random pairing, realized as a single announced permutation of
/// the current bit indices: pairs are (perm[0],perm[1]), (perm[2],perm[3]),
/// ...; with an odd count the final element is left over (and dropped).
struct PairingPlan {
    std::vector<uint32_t> perm;

    static PairingPlan random(size_t count, Rng& rng);

    size_t pair_count() const { return perm.size() / 2; }
    std::optional<uint32_t> leftover() const;
    /// Throws std::invalid_argument unless perm is a permutation of [0, n).
    void validate() const;
};

struct RoundStats {
    size_t round = 0;  // 1-based
    size_t input_bits = 0;
    size_t pairs = 0;
    size_t disagreements = 0;
    size_t kept = 0;                  // = pairs - disagreements
    size_t parity_bits_announced = 0; // per side, = pairs
    double residual_estimate = 0.0;   // post-round, from the observed rate
    bool anomalous = false;
};

struct ResidualEstimate {
    double pre = 0.0;   // rate inferred for the round's input bits
    double post = 0.0;  // rate inferred for the kept bits
    bool anomalous = false;
};

/// Inverts the observed pair-disagreement fraction f = 2e(1-e) to
/// pre = (1 - sqrt(1 - 2f)) / 2, then maps through the kept-bit conditional
/// post = pre^2 / ((1-pre)^2 + pre^2). f beyond 1/2 saturates pre at 1/2 and
/// sets the anomalous flag instead of failing.
ResidualEstimate estimate_residual(double disagree_fraction);

struct CrudeRoundResult {
    BitVec kept_a;
    BitVec kept_b;
    RoundStats stats;
};

/// One round of crude error correction: both parties announce the parity of
/// each pair; an agreeing pair keeps its first bit, a disagreeing pair drops
/// both, the odd leftover is dropped. Announcements land in the transcript
/// as "parity_ack" records.
CrudeRoundResult crude_round(const BitVec& alice_bits, const BitVec& bob_bits,
                             const PairingPlan& plan, Transcript& transcript,
                             size_t round_index = 1);

struct CascadeResult {
    BitVec alice_bits;
    BitVec bob_bits;
    std::vector<RoundStats> rounds;
};

/// Repeats crude_round with fresh announced pairings until the post-round
/// residual estimate reaches target_residual. Aborts with RoundsExhausted if
/// max_rounds rounds never get there, PopulationExhausted if fewer than two
/// bits remain.
CascadeResult crude_cascade(BitVec alice_bits, BitVec bob_bits, double target_residual,
                            size_t max_rounds, Rng& rng, Transcript& transcript);

/// Splits both sides into floor(len / n_s) subsets of exactly n_s bits, in
/// index order; the remainder is discarded. Aborts with TooFewBits when not
/// even one subset fits.
std::vector<std::pair<BitVec, BitVec>> partition_subsets(const BitVec& alice_bits,
                                                         const BitVec& bob_bits,
                                                         size_t n_s);

}  // namespace qkd

#pragma once

#include <cstddef>
#include <vector>

#include "qkdsim/gf2.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/transcript.hpp"

namespace qkd {

/// The m announced random parity strings for one subset. strings[j] has
/// length n_s - j (so R_1..R_m run n_s down to n_s - m + 1, one bit removed
/// per accepted round), and every string is nonzero.
struct ParityStringSet {
    std::vector<BitVec> strings;
};

/// Draws m fair-coin strings of lengths n_s, n_s-1, ..., n_s-m+1, resampling
/// any all-zero draw (a zero string has no last nonzero bit and checks
/// nothing). Announced as "R_string" records carrying subset/round indices.
ParityStringSet gen_parity_strings(size_t n_s, size_t m, Rng& rng, Transcript& transcript,
                                   size_t subset_index = 0);

struct VerifyRoundResult {
    bool accepted = false;
    BitVec s_a;               // shortened strings when accepted
    BitVec s_b;
    size_t removed_position = 0;  // 1-based p_k within the round's string
};

/// Both parties announce dot(s, R). Equal parities: the bit at R's last
/// nonzero position p_k is removed on both sides (indices above compact
/// down); the removed bit's value is never announced. Unequal: reject.
VerifyRoundResult verify_round(const BitVec& s_a, const BitVec& s_b, const BitVec& r,
                               Transcript& transcript, size_t subset_index = 0,
                               size_t round_index = 1);

struct VerifyOutcome {
    bool accepted = false;
    size_t reject_round = 0;  // 1-based round of the first mismatch
    BitVec survivors_a;       // n_s - m bits per side when accepted
    BitVec survivors_b;
};

/// Runs the m rounds against one subset. Any mismatch rejects the whole
/// subset; survivors of a fully agreeing subset are bit-error-free with
/// probability at least 1 - 2^-m.
VerifyOutcome verify_subset(const BitVec& s_a, const BitVec& s_b,
                            const ParityStringSet& strings, Transcript& transcript,
                            size_t subset_index = 0);

}  // namespace qkd
